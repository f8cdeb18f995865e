#ifndef PRECODE_GAMP_HPP
#define PRECODE_GAMP_HPP

#include <functional>
#include <vector>

#include "precode/alphabet.hpp"
#include "precode/channel.hpp"
#include "precode/constellation.hpp"
#include "precode/types.hpp"

namespace precode {

enum class SerMode {
    kTaylor, // second-order expansion of the outage penalty around u
    kNewton  // exact 1-D proximal solve per real axis
};

struct AnnealSchedule {
    double gamma0 = 2.0;
    double rate = 1.2;
    double gamma_max = 1e4;
};

struct IterInfo {
    int iter;
    double cost;
    double best_cost;
    double beta;
    double gamma;
};

struct GampConfig {
    double mu = 0.5;          // damping in (0, 1]
    double theta0 = 1.0;      // initial curvature message
    int max_iters = 100;
    double rel_tol = 1e-4;    // stop when the best cost moved less than this
    int stall_window = 10;    // ... over this many iterations (rel_tol <= 0: never)
    AnnealSchedule anneal;
    InputSlopeMode input_slope_mode = InputSlopeMode::kGibbs;
    SerMode ser_mode = SerMode::kNewton;
    std::function<void(const IterInfo&)> iter_callback; // optional trace hook
};

struct GampState {
    CVec x;       // final solution, hard-projected, every entry in X
    CVec x_soft;  // last soft iterate (before projection)
    CVec z;       // output-step messages (length K, or MK for block runs)
    RVec theta;   // curvature toward the output step
    RVec xi;      // curvature toward the input step
    double beta = 1.0;
    std::vector<double> cost_trace; // one entry per iteration (hard-projected cost)
    int iterations = 0;
    double best_cost = 0.0;
};

/// Sum-MSE criterion with (optionally) active constellation extension;
/// the receiver gain beta is refit once per iteration unless disabled.
struct MseProblem {
    const FlatChannel* channel = nullptr;
    CVec data;
    double sigma_n_sq = 0.0;
    Constellation constellation = Constellation::qpsk();
    PhaseAlphabet alphabet{2};
    bool use_ace = true;
    bool update_beta = true;
    double beta0 = 1.0;
};

/// Uncoded symbol-error criterion, QPSK only, beta fixed to one.
struct SerProblem {
    const FlatChannel* channel = nullptr;
    CVec data; // entries in {+-1 +-j}
    double sigma_n_sq = 0.0;
    PhaseAlphabet alphabet{2};
};

/// MSE output step g(-u, d, theta) = (prox_{S(d)}(u) - u) / (1 + theta)
/// applied per entry; slope is the Wirtinger derivative w.r.t. the first
/// argument: (1 - (clamp_re' + clamp_im')/2) / (1 + theta).
struct OutputStep {
    cplx z;
    double slope;
};

OutputStep mse_output_step(cplx u, const AceRegion& region, double theta);

void mse_output_step(const CVec& u, const std::vector<AceRegion>& regions,
                     double theta, CVec& z, RVec& slope);

/// Per-axis pieces of the SER penalty Gamma(w, d) = sum_axes -log Phi(c w_ax),
/// c = d_ax sqrt(2)/sigma_n, together with its first two axis derivatives.
struct GammaSer {
    double value;
    double grad_re, grad_im;
    double hess_re, hess_im;
};

GammaSer gamma_ser(cplx w, cplx d, double sigma_n);

/// One real axis of the SER output step with penalty -log Phi(c w):
/// w_star minimizes Gamma(w) + (w - u)^2 / theta, z = (w_star - u)/theta,
/// slope is the derivative of z w.r.t. the first argument -u. Newton mode
/// solves the stationarity exactly (safeguarded, tol 1e-10, <= 50 steps,
/// bisection fallback); Taylor mode linearizes around u. Both agree as
/// theta -> 0.
struct SerAxisSolution {
    double w_star;
    double z;
    double slope;
};

SerAxisSolution ser_axis_solve(double u, double c, double theta, SerMode mode);

OutputStep ser_output_step(cplx u, cplx d, double theta, double sigma_n, SerMode mode);

/// Eq.-style cost evaluations. mse_cost performs the inner minimization over
/// the ACE vector in closed form.
double mse_cost(const CVec& x, double beta, const FlatChannel& channel,
                const std::vector<AceRegion>& regions, double sigma_n_sq);
double ser_cost(const CVec& x, const FlatChannel& channel, const CVec& data,
                double sigma_n_sq);

/// Exact alternating minimization of the MSE cost over (beta, s) for a fixed
/// precoder output; the receiver-side "genie" scaling rule.
double genie_beta(const FlatChannel& channel, const CVec& x,
                  const std::vector<AceRegion>& regions, double sigma_n_sq,
                  int iters = 50, double beta0 = 1.0);

std::vector<AceRegion> ace_regions_of(const CVec& data, const Constellation& cons,
                                      bool use_ace);

/// Damped min-sum GAMP (Algorithm-1 recursion) on a flat channel. Returns the
/// hard-projected iterate with the lowest cost seen.
GampState run_gamp(const MseProblem& problem, const GampConfig& config);
GampState run_gamp(const SerProblem& problem, const GampConfig& config);

} // namespace precode

#endif
