#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "udn/errors.hpp"
#include "udn/version.hpp"

// CSV emission with a '#'-prefixed provenance block and atomic writes:
// content is assembled in memory, written to a temporary file, then renamed,
// so failed runs never leave partial output behind.

namespace udn {

inline std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::string command) {
        provenance_.push_back("# udn " + std::string(version_string));
        provenance_.push_back("# command = " + command);
    }

    void provenance(const std::string& key, const std::string& value) {
        provenance_.push_back("# " + key + " = " + value);
    }
    void provenance(const std::string& key, double value) {
        provenance(key, format_number(value));
    }
    void provenance(const std::string& key, long value) {
        provenance(key, std::to_string(value));
    }

    void header(const std::vector<std::string>& cols) { header_ = join(cols); }

    void row(const std::vector<std::string>& cells) { rows_.push_back(join(cells)); }

    std::string str() const {
        std::ostringstream os;
        for (const auto& line : provenance_) os << line << '\n';
        if (!header_.empty()) os << header_ << '\n';
        for (const auto& r : rows_) os << r << '\n';
        return os.str();
    }

    void write(std::ostream& os) const { os << str(); }

    void write_atomic(const std::string& path) const {
        namespace fs = std::filesystem;
        const fs::path target(path);
        const fs::path tmp = target.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("cannot open output file '" + tmp.string() + "'");
            out << str();
            if (!out) {
                out.close();
                std::error_code ec;
                fs::remove(tmp, ec);
                throw std::runtime_error("write failed for '" + tmp.string() + "'");
            }
        }
        std::error_code ec;
        fs::rename(tmp, target, ec);
        if (ec) {
            fs::remove(tmp, ec);
            throw std::runtime_error("cannot rename temporary output to '" + path + "'");
        }
    }

private:
    static std::string join(const std::vector<std::string>& cells) {
        std::string out;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        return out;
    }

    std::vector<std::string> provenance_;
    std::string header_;
    std::vector<std::string> rows_;
};

} // namespace udn
