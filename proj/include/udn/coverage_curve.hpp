#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace udn {

// Tabulated coverage probability vs SINR threshold (linear), non-increasing.
// `errors` is empty for analytic curves, per-point standard errors otherwise.
struct CoverageCurve {
    std::vector<double> gammas;
    std::vector<double> values;
    std::vector<double> errors;

    void validate() const {
        if (gammas.empty()) throw std::domain_error("coverage curve: empty gamma grid");
        if (values.size() != gammas.size())
            throw std::domain_error("coverage curve: gammas/values size mismatch");
        if (!errors.empty() && errors.size() != gammas.size())
            throw std::domain_error("coverage curve: errors size mismatch");
        for (std::size_t i = 0; i < gammas.size(); ++i) {
            if (!(gammas[i] > 0.0) || !std::isfinite(gammas[i]))
                throw std::domain_error("coverage curve: thresholds must be positive");
            if (i > 0 && !(gammas[i] > gammas[i - 1]))
                throw std::domain_error("coverage curve: thresholds must be strictly increasing");
            if (values[i] < 0.0 || values[i] > 1.0)
                throw std::domain_error("coverage curve: values must lie in [0,1]");
            if (i > 0 && values[i] > values[i - 1] + 1e-12)
                throw std::domain_error("coverage curve: values must be non-increasing");
        }
    }
};

} // namespace udn
