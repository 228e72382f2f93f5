#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace udn {

// Model construction or validity failure (bad segments, divergent tails, ...).
class model_error : public std::runtime_error {
public:
    explicit model_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical routine failed to converge; message carries diagnostics.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Config file problem, with a 1-based line number when known.
class config_error : public std::runtime_error {
public:
    config_error(const std::string& msg, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// Non-fatal diagnostics go to stderr so CSV/stdout output stays clean.
inline void warn(const std::string& msg) {
    std::fprintf(stderr, "udn: warning: %s\n", msg.c_str());
}

} // namespace udn
