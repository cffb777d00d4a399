#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "wavecert/error.hpp"

namespace wavecert {

enum class Sign { Plus, Minus };

/// (t + 2 + r)^s for Sign::Plus, (t + 2 - r)^s for Sign::Minus.
inline double weight_eval(double t, double r, double s, Sign sign) {
    require(t >= 0.0 && r >= 0.0, "weight_eval: t and r must be non-negative");
    const double base = (sign == Sign::Plus) ? t + 2.0 + r : t + 2.0 - r;
    if (base < 0.0) throw DomainError("weight_eval: t + 2 - r < 0, weight base is negative");
    return std::pow(base, s);
}

/// Exponents shared by the weighted norms. sigma and beta are derived from
/// (theta, q) by 1/sigma = theta/2 and 1/beta = theta/q + (1 - theta)/2.
struct WeightParams {
    double s = 1.5;
    double delta = 0.25;
    double alpha = 0.0;
    double p = 2.0;
    double theta = 0.05;
    double q = 4.0;

    double sigma() const { return 2.0 / theta; }
    double beta() const { return 1.0 / (theta / q + 0.5 * (1.0 - theta)); }

    /// 1 < s < 2 and delta > 0, as required by the weighted estimate.
    void validate_estimate() const {
        require(s > 1.0 && s < 2.0, "WeightParams: s must lie in (1, 2), got " + std::to_string(s));
        require(delta > 0.0, "WeightParams: delta must be positive");
        require(alpha >= 0.0, "WeightParams: alpha must be non-negative");
    }

    /// Additionally 1 + 2 delta <= s, the condition that folds the two source norms into one.
    void validate_final() const {
        validate_estimate();
        require(1.0 + 2.0 * delta <= s + 1e-15, "WeightParams: need 1 + 2 delta <= s");
    }

    void validate_interpolation() const {
        require(theta > 0.0 && theta < 1.0, "WeightParams: theta must lie in (0, 1)");
        require(q >= 2.0, "WeightParams: q must be >= 2");
    }
};

} // namespace wavecert
