#include "precode/gamp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "precode/gaussian.hpp"

namespace precode {

OutputStep mse_output_step(cplx u, const AceRegion& region, double theta) {
    AceProjection p = ace_project(u, region);
    OutputStep out;
    out.z = (p.s - u) / (1.0 + theta);
    out.slope = (1.0 - 0.5 * (p.slope_re + p.slope_im)) / (1.0 + theta);
    return out;
}

void mse_output_step(const CVec& u, const std::vector<AceRegion>& regions,
                     double theta, CVec& z, RVec& slope) {
    const Eigen::Index k = u.size();
    z.resize(k);
    slope.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        OutputStep s = mse_output_step(u(i), regions[static_cast<size_t>(i)], theta);
        z(i) = s.z;
        slope(i) = s.slope;
    }
}

GammaSer gamma_ser(cplx w, cplx d, double sigma_n) {
    if (!(sigma_n > 0.0)) throw std::invalid_argument("gamma_ser: sigma_n must be > 0");
    GammaSer g;
    const double cr = d.real() * std::sqrt(2.0) / sigma_n;
    const double ci = d.imag() * std::sqrt(2.0) / sigma_n;
    NegLogPhi re = neg_log_phi(cr * w.real());
    NegLogPhi im = neg_log_phi(ci * w.imag());
    g.value = re.value + im.value;
    g.grad_re = cr * re.grad;
    g.grad_im = ci * im.grad;
    g.hess_re = cr * cr * re.hess;
    g.hess_im = ci * ci * im.hess;
    return g;
}

namespace {

// third axis derivative of -log Phi(c w): c^3 rho [1 - (2 rho + t)(rho + t)]
double nlp_third(double t) {
    const double rho = inverse_mills(t);
    return rho * (1.0 - (2.0 * rho + t) * (rho + t));
}

// Taylor mode: stationarity of Gamma(w) + (w-u)^2/theta linearized at u gives
// z = (w - u)/theta = -Gamma'(u) / (theta Gamma''(u) + 2); the slope
// differentiates this expression (w.r.t. the first argument -u).
SerAxisSolution ser_axis_taylor(double u, double c, double theta) {
    const double t = c * u;
    NegLogPhi f = neg_log_phi(t);
    const double g1 = c * f.grad;
    const double g2 = c * c * f.hess;
    const double g3 = c * c * c * nlp_third(t);
    const double den = theta * g2 + 2.0;
    SerAxisSolution s;
    s.z = -g1 / den;
    s.w_star = u + theta * s.z;
    s.slope = (g2 * den - theta * g1 * g3) / (den * den);
    return s;
}

// Newton mode: solve Gamma'(w) + 2 (w - u)/theta = 0 exactly (strictly
// increasing in w), then z = (w* - u)/theta and the implicit-function slope
// Gamma''(w*) / (theta Gamma''(w*) + 2).
SerAxisSolution ser_axis_newton(double u, double c, double theta) {
    if (theta < 1e-12) return ser_axis_taylor(u, c, theta);

    auto h = [&](double w, double& deriv) {
        NegLogPhi f = neg_log_phi(c * w);
        deriv = c * c * f.hess + 2.0 / theta;
        return c * f.grad + 2.0 * (w - u) / theta;
    };

    double deriv;
    double w = u;
    double hw = h(w, deriv);
    // bracket the root by doubling steps against the sign of h(u)
    double lo = w, hi = w;
    if (hw > 0.0) {
        double step = std::max(1.0, std::fabs(w));
        do {
            lo -= step;
            step *= 2.0;
            hw = h(lo, deriv);
        } while (hw > 0.0 && step < 1e12);
    } else if (hw < 0.0) {
        double step = std::max(1.0, std::fabs(w));
        do {
            hi += step;
            step *= 2.0;
            hw = h(hi, deriv);
        } while (hw < 0.0 && step < 1e12);
    }

    w = 0.5 * (lo + hi);
    for (int it = 0; it < 50; ++it) {
        double val = h(w, deriv);
        if (val > 0.0) hi = w; else lo = w;
        double step = val / deriv;
        double next = w - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi); // bisection fallback
        double delta = std::fabs(next - w);
        w = next;
        if (delta < 1e-10 * std::max(1.0, std::fabs(w))) break;
    }

    NegLogPhi f = neg_log_phi(c * w);
    const double g2 = c * c * f.hess;
    SerAxisSolution s;
    s.w_star = w;
    s.z = (w - u) / theta;
    s.slope = g2 / (theta * g2 + 2.0);
    return s;
}

} // namespace

SerAxisSolution ser_axis_solve(double u, double c, double theta, SerMode mode) {
    return (mode == SerMode::kNewton) ? ser_axis_newton(u, c, theta)
                                      : ser_axis_taylor(u, c, theta);
}

OutputStep ser_output_step(cplx u, cplx d, double theta, double sigma_n, SerMode mode) {
    if (!(sigma_n > 0.0)) throw std::invalid_argument("ser_output_step: sigma_n must be > 0");
    const double cr = d.real() * std::sqrt(2.0) / sigma_n;
    const double ci = d.imag() * std::sqrt(2.0) / sigma_n;
    SerAxisSolution re = ser_axis_solve(u.real(), cr, theta, mode);
    SerAxisSolution im = ser_axis_solve(u.imag(), ci, theta, mode);
    OutputStep out;
    out.z = {re.z, im.z};
    out.slope = 0.5 * (re.slope + im.slope);
    return out;
}

std::vector<AceRegion> ace_regions_of(const CVec& data, const Constellation& cons,
                                      bool use_ace) {
    std::vector<AceRegion> regions(static_cast<size_t>(data.size()));
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        if (use_ace) {
            regions[static_cast<size_t>(i)] = AceRegion::of(data(i), cons);
        } else {
            AceRegion r;
            r.anchor = data(i);
            r.axis_aligned = true;
            r.axis = {AceRegion::Axis::kFixed, AceRegion::Axis::kFixed};
            regions[static_cast<size_t>(i)] = r;
        }
    }
    return regions;
}

double mse_cost(const CVec& x, double beta, const FlatChannel& channel,
                const std::vector<AceRegion>& regions, double sigma_n_sq) {
    CVec w = channel.h * x;
    double cost = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
        cplx bw = beta * w(k);
        cplx s = ace_project(bw, regions[static_cast<size_t>(k)]).s;
        cost += std::norm(bw - s);
    }
    cost += channel.users() * beta * beta * sigma_n_sq;
    return cost;
}

double ser_cost(const CVec& x, const FlatChannel& channel, const CVec& data,
                double sigma_n_sq) {
    const double sigma_n = std::sqrt(sigma_n_sq);
    CVec w = channel.h * x;
    double cost = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k)
        cost += gamma_ser(w(k), data(k), sigma_n).value;
    return cost;
}

double genie_beta(const FlatChannel& channel, const CVec& x,
                  const std::vector<AceRegion>& regions, double sigma_n_sq,
                  int iters, double beta0) {
    CVec w = channel.h * x;
    const double denom = w.squaredNorm() + channel.users() * sigma_n_sq;
    if (denom <= 0.0) return beta0;
    double beta = beta0;
    for (int it = 0; it < iters; ++it) {
        double num = 0.0;
        for (Eigen::Index k = 0; k < w.size(); ++k) {
            cplx s = ace_project(beta * w(k), regions[static_cast<size_t>(k)]).s;
            num += (std::conj(s) * w(k)).real();
        }
        double next = num / denom;
        if (std::fabs(next - beta) < 1e-14 * std::max(1.0, std::fabs(beta))) {
            beta = next;
            break;
        }
        beta = next;
    }
    return beta;
}

namespace {

enum class Criterion { kMse, kSer };

struct CoreProblem {
    const FlatChannel* channel;
    CVec data;
    double sigma_n_sq;
    const PhaseAlphabet* alphabet;
    Criterion criterion;
    std::vector<AceRegion> regions; // MSE only
    bool update_beta;
    double beta0;
};

GampState run_core(const CoreProblem& pb, const GampConfig& cfg) {
    const FlatChannel& ch = *pb.channel;
    const int users = ch.users();
    const int ants = ch.antennas();
    if (pb.data.size() != users)
        throw std::invalid_argument("run_gamp: data length must equal K");
    if (!(cfg.mu > 0.0 && cfg.mu <= 1.0))
        throw std::invalid_argument("run_gamp: mu must be in (0, 1]");
    if (!(cfg.theta0 > 0.0)) throw std::invalid_argument("run_gamp: theta0 must be > 0");

    const double sigma_n = std::sqrt(pb.sigma_n_sq);
    const RMat energy = ch.h.cwiseAbs2(); // |H|^2, used for both curvature maps

    CVec x = CVec::Zero(ants);
    CVec z = CVec::Zero(users);
    RVec theta = RVec::Constant(users, cfg.theta0);
    RVec xi = RVec::Zero(ants);
    RVec gslope(users), fslope(ants);
    double beta = (pb.criterion == Criterion::kSer) ? 1.0 : pb.beta0;
    double gamma = cfg.anneal.gamma0;

    GampState st;
    st.cost_trace.reserve(static_cast<size_t>(cfg.max_iters));
    double best_cost = std::numeric_limits<double>::infinity();
    CVec best_x;
    double best_beta = beta;
    std::vector<double> best_hist;
    best_hist.reserve(static_cast<size_t>(cfg.max_iters));

    // the MSE objective minimizes jointly over (x, s, beta); candidate
    // iterates are scored with beta and s refit, so "best cost seen" means
    // the objective itself
    double scored_beta = beta;
    auto hard_cost = [&](const CVec& xh) {
        if (pb.criterion == Criterion::kSer) return ser_cost(xh, ch, pb.data, pb.sigma_n_sq);
        scored_beta = pb.update_beta
                          ? genie_beta(ch, xh, pb.regions, pb.sigma_n_sq, 20, beta)
                          : beta;
        return mse_cost(xh, scored_beta, ch, pb.regions, pb.sigma_n_sq);
    };

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        // output step: first argument of g is -u = -A x + theta o z
        CVec u = beta * (ch.h * x) - theta.array().cwiseProduct(z.array()).matrix();
        for (int k = 0; k < users; ++k) {
            OutputStep s =
                (pb.criterion == Criterion::kMse)
                    ? mse_output_step(u(k), pb.regions[static_cast<size_t>(k)], theta(k))
                    : ser_output_step(u(k), pb.data(k), theta(k), sigma_n, cfg.ser_mode);
            z(k) = s.z;
            gslope(k) = s.slope;
        }
        xi = (beta * beta) * (energy.transpose() * gslope);
        xi = xi.cwiseMax(1e-12);

        // input step with damping
        CVec v = beta * (ch.h.adjoint() * z) + xi.array().cwiseProduct(x.array()).matrix();
        for (int n = 0; n < ants; ++n) {
            SoftProjection sp =
                phase_soft_project(v(n), xi(n), gamma, *pb.alphabet, cfg.input_slope_mode);
            x(n) = (1.0 - cfg.mu) * x(n) + cfg.mu * sp.value;
            fslope(n) = sp.slope.real();
        }
        theta = cfg.mu * (beta * beta) * (energy * fslope);

        if (!x.allFinite() || !z.allFinite() || !theta.allFinite() || !xi.allFinite())
            throw std::runtime_error("run_gamp: NaN in messages at iteration " +
                                     std::to_string(iter));

        if (pb.criterion == Criterion::kMse && pb.update_beta) {
            CVec w = ch.h * x;
            double num = 0.0;
            for (int k = 0; k < users; ++k) {
                cplx s = ace_project(beta * w(k), pb.regions[static_cast<size_t>(k)]).s;
                num += (std::conj(s) * w(k)).real();
            }
            double den = w.squaredNorm() + users * pb.sigma_n_sq;
            if (den > 0.0 && std::isfinite(num)) beta = num / den;
        }

        CVec xh(ants);
        for (int n = 0; n < ants; ++n) xh(n) = phase_project(x(n), *pb.alphabet);
        double cost = hard_cost(xh);
        st.cost_trace.push_back(cost);

        if (cost < best_cost) {
            best_cost = cost;
            best_x = xh;
            best_beta = scored_beta;
        }
        if (cfg.iter_callback)
            cfg.iter_callback(IterInfo{iter, cost, best_cost, beta, gamma});

        gamma = std::min(gamma * cfg.anneal.rate, cfg.anneal.gamma_max);
        st.iterations = iter;
        // stop when the best cost has not moved by rel_tol over the last
        // stall_window iterations (rel_tol <= 0: run to max_iters)
        best_hist.push_back(best_cost);
        if (cfg.rel_tol > 0.0 && static_cast<int>(best_hist.size()) > cfg.stall_window) {
            double ref = best_hist[best_hist.size() - 1 - cfg.stall_window];
            if (ref - best_cost <= cfg.rel_tol * std::max(std::fabs(ref), 1e-30)) break;
        }
    }

    st.x = best_x;
    st.x_soft = x;
    st.z = z;
    st.theta = theta;
    st.xi = xi;
    st.beta = best_beta;
    st.best_cost = best_cost;
    return st;
}

} // namespace

GampState run_gamp(const MseProblem& problem, const GampConfig& config) {
    CoreProblem pb;
    pb.channel = problem.channel;
    pb.data = problem.data;
    pb.sigma_n_sq = problem.sigma_n_sq;
    pb.alphabet = &problem.alphabet;
    pb.criterion = Criterion::kMse;
    pb.regions = ace_regions_of(problem.data, problem.constellation, problem.use_ace);
    pb.update_beta = problem.update_beta;
    pb.beta0 = problem.beta0;
    return run_core(pb, config);
}

GampState run_gamp(const SerProblem& problem, const GampConfig& config) {
    for (Eigen::Index k = 0; k < problem.data.size(); ++k) {
        if (std::fabs(std::fabs(problem.data(k).real()) - 1.0) > 1e-9 ||
            std::fabs(std::fabs(problem.data(k).imag()) - 1.0) > 1e-9)
            throw std::invalid_argument("run_gamp(SER): data must be QPSK {+-1 +-j}");
    }
    CoreProblem pb;
    pb.channel = problem.channel;
    pb.data = problem.data;
    pb.sigma_n_sq = problem.sigma_n_sq;
    pb.alphabet = &problem.alphabet;
    pb.criterion = Criterion::kSer;
    pb.update_beta = false;
    pb.beta0 = 1.0;
    return run_core(pb, config);
}

} // namespace precode
