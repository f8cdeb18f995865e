#include "precode/sevo.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "precode/gaussian.hpp"

namespace precode {

namespace {
constexpr double kThetaCap = 1e9; // divergent-beta branch: theta -> inf limit
const double kNaN = std::numeric_limits<double>::quiet_NaN();
} // namespace

double phase_dac_factor(int bits) {
    if (bits <= 0) return kPi;
    double x = kPi / std::pow(2.0, bits);
    if (x < 1e-6) return kPi * (1.0 - x * x / 6.0);
    return kPi * std::sin(x) / x;
}

double stein_theta(double nu, double beta, double q, int bits) {
    if (!(nu > 0.0) || !(beta > 0.0) || !(q > 0.0))
        throw std::invalid_argument("stein_theta: nu, beta, q must be > 0");
    return phase_dac_factor(bits) / (2.0 * std::sqrt(kPi * nu / (beta * beta * q)));
}

double coeff_a(int bits, double n_over_k) {
    if (!(n_over_k > 0.0)) throw std::invalid_argument("coeff_a: N/K must be > 0");
    double s = phase_dac_factor(bits);
    return s * s * n_over_k / (4.0 * kPi);
}

double sinr_of_theta(double theta, double a, double snr) {
    double op = 1.0 + theta;
    return (a * op * op - theta * theta) / (1.0 + op * op / snr);
}

SinrOpt sinr_opt(double a, double snr) {
    if (!(a > 0.0) || !(snr > 0.0)) throw std::invalid_argument("sinr_opt: a, snr must be > 0");
    double p = 0.5 * (a - 1.0) * snr - 0.5;
    double disc = std::sqrt(a * snr + p * p);
    double theta = (p >= 0.0) ? p + disc : a * snr / (disc - p);
    return {theta, std::log2(1.0 + theta)};
}

double nu_mse_no_ace(double theta, double beta, double q, double sigma_d_sq, double ratio) {
    double op = 1.0 + theta;
    return ratio * (sigma_d_sq + beta * beta * q) / (op * op);
}

double nu_mse_ace(double theta, double beta, double q, int levels, double ratio) {
    const double l = levels;
    const double c = l - 1.0;
    const double bq = beta * beta * q;
    const double z = c * std::sqrt(2.0 / bq);
    // inner points keep the residual constellation power, outer coordinates
    // integrate the half-line distance in closed form
    double inner = (1.0 - 2.0 / l) * ((2.0 / 3.0) * ((l - 2.0) * (l - 2.0) - 1.0) + bq);
    double outer = (2.0 / l) * ((2.0 * c * c + bq) * norm_cdf(z) +
                                c * beta * std::sqrt(q / kPi) * std::exp(-c * c / bq));
    double op = 1.0 + theta;
    return ratio * (inner + outer) / (op * op);
}

double ser_ace(double theta, double beta, double q, int levels, double snr, int quad_order) {
    const double l = levels;
    const double bq = beta * beta * q;
    const double sigma_n = std::sqrt(q / snr);
    const double op = 1.0 + theta;

    double s0_sq = (2.0 * theta * theta / bq) / (1.0 + op * op / snr);
    double inner_err = 2.0 * (l - 2.0) / l * norm_cdf(-std::sqrt(s0_sq));

    // outer-coordinate error: scalar channel with the threshold rescaled by
    // the effective gain theta/(1+theta)
    const GaussHermite& gh = gauss_hermite(quad_order);
    const double scale = std::sqrt(bq);
    double integral = 0.0;
    for (size_t i = 0; i < gh.nodes.size(); ++i) {
        double u = scale * gh.nodes[i];
        double num = u + theta * std::max(1.0, u - l + 2.0);
        double arg = num * std::sqrt(2.0) / (op * beta * sigma_n);
        integral += gh.weights[i] * norm_cdf(-arg);
    }
    integral /= std::sqrt(kPi);

    double p_correct = 1.0 - inner_err - (2.0 / l) * integral;
    p_correct = std::min(1.0, std::max(0.0, p_correct));
    return 1.0 - p_correct * p_correct;
}

double g_scalar_ser(double u, double theta, double sigma_n) {
    if (!(sigma_n > 0.0)) throw std::invalid_argument("g_scalar_ser: sigma_n must be > 0");
    return ser_axis_solve(u, std::sqrt(2.0) / sigma_n, theta, SerMode::kNewton).z;
}

double nu_ser(double theta, double q, double sigma_n, double ratio, int quad_order) {
    const GaussHermite& gh = gauss_hermite(quad_order);
    const double c = std::sqrt(2.0) / sigma_n;
    const double scale = std::sqrt(q);
    double acc = 0.0;
    for (size_t i = 0; i < gh.nodes.size(); ++i) {
        double g = ser_axis_solve(scale * gh.nodes[i], c, theta, SerMode::kNewton).z;
        acc += gh.weights[i] * g * g;
    }
    return 2.0 * ratio * acc / std::sqrt(kPi);
}

double ber_ser(double theta, double q, double sigma_n, int quad_order) {
    const GaussHermite& gh = gauss_hermite(quad_order);
    const double c = std::sqrt(2.0) / sigma_n;
    const double scale = std::sqrt(q);
    double acc = 0.0;
    for (size_t i = 0; i < gh.nodes.size(); ++i) {
        // theta g + u is the proximal point w* itself
        double w = ser_axis_solve(scale * gh.nodes[i], c, theta, SerMode::kNewton).w_star;
        acc += gh.weights[i] * norm_cdf(-std::sqrt(2.0) * w / sigma_n);
    }
    return acc / std::sqrt(kPi);
}

double awgn_qpsk_ber(double sinr) { return norm_cdf(-std::sqrt(std::max(0.0, sinr))); }

double awgn_ser(const Constellation& cons, double sinr) {
    sinr = std::max(0.0, sinr);
    if (cons.kind() == Constellation::Kind::kQam) {
        double l = cons.order();
        double p_ax = 2.0 * (1.0 - 1.0 / l) *
                      norm_cdf(-std::sqrt(3.0 * sinr / (l * l - 1.0)));
        return 1.0 - (1.0 - p_ax) * (1.0 - p_ax);
    }
    int p = cons.order();
    if (p == 2) return norm_cdf(-std::sqrt(2.0 * sinr));
    return std::min(1.0, 2.0 * norm_cdf(-std::sqrt(2.0 * sinr) * std::sin(kPi / p)));
}

SePoint solve_noace_fixed_point(const SeConfig& cfg) {
    const double q = 1.0;
    const double sd2 = cfg.constellation.sigma_d_sq();
    const double beta = cfg.beta;
    const double a = coeff_a(cfg.bits, 1.0 / cfg.ratio);
    const double r = sd2 / (beta * beta * q);

    SePoint pt;
    pt.beta = beta;
    double cfac = std::sqrt(a / (r + 1.0));
    if (cfac < 1.0 - 1e-14) {
        pt.theta = cfac / (1.0 - cfac);
        pt.converged = true;
    } else {
        pt.theta = kThetaCap; // no finite fixed point at this beta
        pt.converged = true;
    }
    pt.nu = nu_mse_no_ace(pt.theta, beta, q, sd2, cfg.ratio);
    double op = 1.0 + pt.theta;
    pt.sinr = (pt.theta * pt.theta * r) / (1.0 + op * op / cfg.snr);
    pt.mse = pt.nu / cfg.ratio + beta * beta * q / cfg.snr;
    pt.ser = awgn_ser(cfg.constellation, pt.sinr);
    pt.ber = (cfg.constellation.size() == 4) ? awgn_qpsk_ber(pt.sinr) : kNaN;
    pt.capacity = std::log2(1.0 + pt.sinr);
    pt.xi = cfg.ratio * beta * beta / op;
    return pt;
}

SePoint solve_ace_fixed_point(const SeConfig& cfg) {
    if (cfg.constellation.kind() != Constellation::Kind::kQam)
        throw std::invalid_argument("solve_ace_fixed_point: QAM constellation required");
    const double q = 1.0;
    const int l = cfg.constellation.order();
    const double beta = cfg.beta;

    SePoint pt;
    pt.beta = beta;
    double theta = 0.0;
    double nu = nu_mse_ace(theta, beta, q, l, cfg.ratio);
    double residual = 1.0;
    int it = 0;
    for (; it < 10000; ++it) {
        double theta_next = std::min(stein_theta(nu, beta, q, cfg.bits), kThetaCap);
        theta = 0.5 * theta + 0.5 * theta_next;
        double nu_next = nu_mse_ace(theta, beta, q, l, cfg.ratio);
        residual = std::fabs(nu_next - nu) / std::max(nu, 1e-300);
        nu = 0.5 * nu + 0.5 * nu_next;
        if (residual < 1e-10) break;
    }
    pt.theta = theta;
    pt.nu = nu;
    pt.converged = residual < 1e-10;
    pt.residual = residual;
    pt.iterations = it + 1;

    double op = 1.0 + theta;
    double sd2 = cfg.constellation.sigma_d_sq();
    pt.sinr = (theta * theta * sd2 / (beta * beta * q)) / (1.0 + op * op / cfg.snr);
    pt.mse = nu / cfg.ratio + beta * beta * q / cfg.snr;
    pt.ser = ser_ace(theta, beta, q, l, cfg.snr, cfg.ser_quad_order);
    pt.ber = (l == 2) ? 1.0 - std::sqrt(std::max(0.0, 1.0 - pt.ser)) : kNaN;
    pt.capacity = std::log2(1.0 + pt.sinr);
    double z = (l - 1.0) * std::sqrt(2.0 / (beta * beta * q));
    pt.xi = cfg.ratio * beta * beta * (1.0 - (2.0 / l) * norm_cdf(-z)) / op;
    return pt;
}

SePoint solve_ser_fixed_point(const SeConfig& cfg) {
    if (cfg.constellation.size() != 4)
        throw std::invalid_argument("solve_ser_fixed_point: QPSK only");
    const double q = 1.0;
    const double sigma_n = std::sqrt(q / cfg.snr);

    SePoint pt;
    pt.beta = 1.0; // the SER criterion has no receiver gain to optimize
    double theta = 0.0;
    double nu = nu_ser(theta, q, sigma_n, cfg.ratio, cfg.quad_order);
    double residual = 1.0;
    int it = 0;
    for (; it < 10000; ++it) {
        double theta_next = std::min(stein_theta(nu, 1.0, q, cfg.bits), kThetaCap);
        theta = 0.5 * theta + 0.5 * theta_next;
        double nu_next = nu_ser(theta, q, sigma_n, cfg.ratio, cfg.quad_order);
        residual = std::fabs(nu_next - nu) / std::max(nu, 1e-300);
        nu = 0.5 * nu + 0.5 * nu_next;
        if (residual < 1e-10) break;
    }
    pt.theta = theta;
    pt.nu = nu;
    pt.converged = residual < 1e-10;
    pt.residual = residual;
    pt.iterations = it + 1;
    pt.ber = ber_ser(theta, q, sigma_n, cfg.ser_quad_order);
    pt.ser = ser_from_ber(pt.ber);
    pt.mse = kNaN;
    pt.sinr = kNaN;
    pt.capacity = kNaN;

    const GaussHermite& gh = gauss_hermite(cfg.quad_order);
    const double c = std::sqrt(2.0) / sigma_n;
    double slope_acc = 0.0;
    for (size_t i = 0; i < gh.nodes.size(); ++i)
        slope_acc += gh.weights[i] *
                     ser_axis_solve(std::sqrt(q) * gh.nodes[i], c, theta, SerMode::kNewton).slope;
    pt.xi = cfg.ratio * slope_acc / std::sqrt(kPi);
    return pt;
}

SePoint solve_fixed_point(const SeConfig& cfg) {
    switch (cfg.criterion) {
        case SeCriterion::kMseNoAce: return solve_noace_fixed_point(cfg);
        case SeCriterion::kMseAce: return solve_ace_fixed_point(cfg);
        case SeCriterion::kSer: return solve_ser_fixed_point(cfg);
    }
    throw std::logic_error("solve_fixed_point: bad criterion");
}

SePoint optimize_beta(const SeConfig& config, BetaObjective objective) {
    if (config.criterion == SeCriterion::kSer) return solve_ser_fixed_point(config);

    auto value_at = [&](double log_beta) {
        SeConfig c = config;
        c.beta = std::exp(log_beta);
        SePoint pt = solve_fixed_point(c);
        return (objective == BetaObjective::kMse) ? pt.mse : pt.ser;
    };

    const double inv_phi = 0.6180339887498949;
    double lo = std::log(1e-3), hi = std::log(1e3);
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = value_at(x1), f2 = value_at(x2);
    while (hi - lo > 1e-6) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = value_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = value_at(x2);
        }
    }
    SeConfig best = config;
    best.beta = std::exp(0.5 * (lo + hi));
    return solve_fixed_point(best);
}

} // namespace precode
