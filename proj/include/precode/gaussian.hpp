#ifndef PRECODE_GAUSSIAN_HPP
#define PRECODE_GAUSSIAN_HPP

#include <cmath>
#include <vector>

#include "precode/types.hpp"

namespace precode {

inline double norm_pdf(double t) {
    return std::exp(-0.5 * t * t) * 0.3989422804014326779399461;
}

inline double norm_cdf(double t) {
    return 0.5 * std::erfc(-t * 0.7071067811865475244008444);
}

namespace detail {

/// Mills ratio R(x) = (1 - Phi(x)) / phi(x) for x >= 4, by backward
/// evaluation of the Laplace continued fraction 1/(x+ 1/(x+ 2/(x+ ...))).
inline double mills_ratio_tail(double x) {
    double t = x;
    for (int i = 140; i >= 1; --i) t = x + static_cast<double>(i) / t;
    return 1.0 / t;
}

} // namespace detail

/// log Phi(t), stable for t down to -40 and beyond.
inline double log_norm_cdf(double t) {
    if (t >= -4.0) return std::log(norm_cdf(t));
    // Phi(t) = phi(t) * R(-t)
    return -0.5 * t * t - 0.9189385332046727417803297 +
           std::log(detail::mills_ratio_tail(-t));
}

/// Inverse Mills ratio rho(t) = phi(t)/Phi(t); stable for very negative t
/// where both terms underflow. rho(t) ~ -t as t -> -inf.
inline double inverse_mills(double t) {
    if (t >= -4.0) return norm_pdf(t) / norm_cdf(t);
    return 1.0 / detail::mills_ratio_tail(-t);
}

/// Value, gradient and curvature of t -> -log Phi(t). The curvature is
/// rho^2 + t*rho > 0 (the function is strictly convex).
struct NegLogPhi {
    double value;
    double grad;
    double hess;
};

inline NegLogPhi neg_log_phi(double t) {
    const double rho = inverse_mills(t);
    return {-log_norm_cdf(t), -rho, rho * rho + t * rho};
}

/// Physicists' Gauss-Hermite rule: sum_i w_i f(x_i) ~ int f(t) e^{-t^2} dt.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussHermite& gauss_hermite(int n);

} // namespace precode

#endif
