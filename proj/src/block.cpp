#include "precode/block.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "precode/fft.hpp"

namespace precode {

CMat block_forward(const CMat& x_time, const WidebandChannel& channel, double beta) {
    const int m = channel.dft_length();
    if (x_time.cols() != m || x_time.rows() != channel.antennas())
        throw std::invalid_argument("block_forward: dimension mismatch");
    CMat xhat = centered_dft_rows(x_time); // N x M
    CMat y(channel.users(), m);
    for (int i = 0; i < m; ++i)
        y.col(i) = beta * (channel.per_tone[static_cast<size_t>(i)] * xhat.col(i));
    return y;
}

CMat block_adjoint(const CMat& y_tones, const WidebandChannel& channel, double beta) {
    const int m = channel.dft_length();
    if (y_tones.cols() != m || y_tones.rows() != channel.users())
        throw std::invalid_argument("block_adjoint: dimension mismatch");
    CMat zhat(channel.antennas(), m);
    for (int i = 0; i < m; ++i)
        zhat.col(i) = beta * (channel.per_tone[static_cast<size_t>(i)].adjoint() * y_tones.col(i));
    return centered_idft_rows(zhat);
}

CVec apply_block_operator(const CVec& x, const WidebandChannel& channel, double beta) {
    const int n = channel.antennas(), m = channel.dft_length();
    Eigen::Map<const CMat> xm(x.data(), n, m);
    CMat y = block_forward(xm, channel, beta);
    return Eigen::Map<const CVec>(y.data(), y.size());
}

CVec apply_block_operator_adjoint(const CVec& y, const WidebandChannel& channel, double beta) {
    const int k = channel.users(), m = channel.dft_length();
    Eigen::Map<const CMat> ym(y.data(), k, m);
    CMat x = block_adjoint(ym, channel, beta);
    return Eigen::Map<const CVec>(x.data(), x.size());
}

namespace {

double clamp1d(double u, double v, AceRegion::Axis axis, double& slope) {
    switch (axis) {
        case AceRegion::Axis::kFixed: slope = 0.0; return v;
        case AceRegion::Axis::kLowerBounded:
            if (u >= v) { slope = 1.0; return u; }
            slope = 0.0; return v;
        case AceRegion::Axis::kUpperBounded:
            if (u <= v) { slope = 1.0; return u; }
            slope = 0.0; return v;
        case AceRegion::Axis::kFree: slope = 1.0; return u;
    }
    slope = 0.0;
    return v;
}

} // namespace

std::vector<AceRegion> block_data_regions(const CMat& data, const Constellation& cons,
                                          bool use_ace, bool real_symbols) {
    const int users = static_cast<int>(data.rows());
    const int syms = static_cast<int>(data.cols());
    std::vector<AceRegion> regions(static_cast<size_t>(users) * syms);
    const double edge = cons.order() - 1;
    for (int k = 0; k < users; ++k)
        for (int c = 0; c < syms; ++c) {
            AceRegion r;
            if (real_symbols) {
                // PAM level on the real axis (offset-QAM rails)
                double v = data(k, c).real();
                r.anchor = {v, 0.0};
                r.axis_aligned = true;
                r.axis[1] = AceRegion::Axis::kFixed;
                if (use_ace && std::fabs(v - edge) < 1e-9)
                    r.axis[0] = AceRegion::Axis::kLowerBounded;
                else if (use_ace && std::fabs(v + edge) < 1e-9)
                    r.axis[0] = AceRegion::Axis::kUpperBounded;
                else
                    r.axis[0] = AceRegion::Axis::kFixed;
            } else if (use_ace) {
                r = AceRegion::of(data(k, c), cons);
            } else {
                r.anchor = data(k, c);
                r.axis_aligned = true;
                r.axis = {AceRegion::Axis::kFixed, AceRegion::Axis::kFixed};
            }
            regions[static_cast<size_t>(k) * syms + c] = r;
        }
    return regions;
}

// projected symbols for one user stream + accumulated half clamp slopes
static void project_stream(const CVec& reduced, const std::vector<AceRegion>& regions,
                           int user, int syms, bool real_symbols, CVec& s,
                           double& half_clamps) {
    s.resize(syms);
    for (int c = 0; c < syms; ++c) {
        const AceRegion& r = regions[static_cast<size_t>(user) * syms + c];
        if (real_symbols) {
            double slope;
            double val = clamp1d(reduced(c).real(), r.anchor.real(), r.axis[0], slope);
            s(c) = val;
            half_clamps += 0.5 * slope;
        } else {
            AceProjection p = ace_project(reduced(c), r);
            s(c) = p.s;
            half_clamps += 0.5 * (p.slope_re + p.slope_im);
        }
    }
}

BlockOutput block_output_step(const CMat& u_tones, const CMat& data,
                              const std::vector<AceRegion>& regions, double theta,
                              const Shaper& shaper) {
    const int users = static_cast<int>(u_tones.rows());
    const int m = static_cast<int>(u_tones.cols());
    const int syms = shaper.num_symbols();
    if (data.cols() != syms || data.rows() != users)
        throw std::invalid_argument("block_output_step: data shape mismatch");

    BlockOutput out;
    out.z.resize(users, m);
    double half_clamps = 0.0;
    CVec s;
    for (int k = 0; k < users; ++k) {
        CVec u_k = u_tones.row(k).transpose();
        CVec reduced = shaper.reduce(u_k);
        project_stream(reduced, regions, k, syms, shaper.real_symbols(), s, half_clamps);
        out.z.row(k) = ((shaper.expand(s) - u_k) / (1.0 + theta)).transpose();
    }
    const double mk = static_cast<double>(m) * users;
    out.trace_slope = (mk - half_clamps) / ((1.0 + theta) * mk);
    return out;
}

double update_beta(const CMat& x_time, const CMat& s_symbols, const Shaper& shaper,
                   const WidebandChannel& channel, double sigma_n_sq) {
    CMat v = block_forward(x_time, channel, 1.0); // K x M
    const int users = channel.users();
    const int m = channel.dft_length();
    double num = 0.0;
    for (int k = 0; k < users; ++k) {
        CVec gs = shaper.expand(s_symbols.row(k).transpose());
        num += (gs.conjugate().cwiseProduct(v.row(k).transpose())).sum().real();
    }
    double den = v.squaredNorm() + users * m * sigma_n_sq;
    return num / den;
}

double block_cost(const CMat& x_time, double beta, const BlockProblem& problem,
                  const std::vector<AceRegion>& regions) {
    const WidebandChannel& ch = *problem.channel;
    const Shaper& sh = *problem.shaper;
    CMat v = block_forward(x_time, ch, beta);
    const int users = ch.users();
    const int m = ch.dft_length();
    const int syms = sh.num_symbols();
    double cost = 0.0;
    CVec s;
    double dummy = 0.0;
    for (int k = 0; k < users; ++k) {
        CVec v_k = v.row(k).transpose();
        CVec reduced = sh.reduce(v_k);
        project_stream(reduced, regions, k, syms, sh.real_symbols(), s, dummy);
        cost += (v_k - sh.expand(s)).squaredNorm();
    }
    cost += users * m * beta * beta * problem.sigma_n_sq;
    return cost;
}

BlockResult run_block_gamp(const BlockProblem& problem, const GampConfig& config) {
    const WidebandChannel& ch = *problem.channel;
    const Shaper& sh = *problem.shaper;
    const int users = ch.users();
    const int ants = ch.antennas();
    const int m = ch.dft_length();
    if (sh.block_len() != m)
        throw std::invalid_argument("run_block_gamp: shaper/channel block length mismatch");
    if (problem.data.rows() != users || problem.data.cols() != sh.num_symbols())
        throw std::invalid_argument("run_block_gamp: data shape mismatch");
    if (!(config.mu > 0.0 && config.mu <= 1.0))
        throw std::invalid_argument("run_block_gamp: mu must be in (0, 1]");

    const auto regions = block_data_regions(problem.data, problem.constellation,
                                            problem.use_ace, sh.real_symbols());

    // uniform curvature approximations: column and row energies of A at beta=1
    RVec col_energy = RVec::Zero(ants);
    double total_energy = 0.0;
    for (int i = 0; i < m; ++i) {
        RVec cn = ch.per_tone[static_cast<size_t>(i)].cwiseAbs2().colwise().sum().transpose();
        col_energy += cn;
        total_energy += cn.sum();
    }
    col_energy /= static_cast<double>(m);
    const double mean_row_energy = total_energy / (static_cast<double>(m) * users);

    CMat x = CMat::Zero(ants, m);
    CMat z = CMat::Zero(users, m);
    double theta = config.theta0;
    RVec xi = RVec::Zero(ants);
    double beta = problem.beta0;
    double gamma = config.anneal.gamma0;

    GampState st;
    double best_cost = std::numeric_limits<double>::infinity();
    CMat best_x;
    double best_beta = beta;
    std::vector<double> best_hist;
    best_hist.reserve(static_cast<size_t>(config.max_iters));
    CVec s_fit;
    double scratch = 0.0;

    for (int iter = 1; iter <= config.max_iters; ++iter) {
        CMat u = block_forward(x, ch, beta) - theta * z;
        BlockOutput out = block_output_step(u, problem.data, regions, theta, sh);
        z = out.z;
        xi = (beta * beta * out.trace_slope) * col_energy;
        xi = xi.cwiseMax(1e-12);

        CMat v = block_adjoint(z, ch, beta) + xi.asDiagonal() * x;
        double fslope_sum = 0.0;
        for (int t = 0; t < m; ++t)
            for (int n = 0; n < ants; ++n) {
                SoftProjection sp = phase_soft_project(v(n, t), xi(n), gamma,
                                                       problem.alphabet,
                                                       config.input_slope_mode);
                x(n, t) = (1.0 - config.mu) * x(n, t) + config.mu * sp.value;
                fslope_sum += sp.slope.real();
            }
        theta = config.mu * beta * beta * mean_row_energy *
                (fslope_sum / (static_cast<double>(m) * ants));

        if (!x.allFinite() || !z.allFinite() || !std::isfinite(theta))
            throw std::runtime_error("run_block_gamp: NaN in messages at iteration " +
                                     std::to_string(iter));

        if (problem.update_beta) {
            CMat v1 = block_forward(x, ch, 1.0);
            CMat s_all(users, sh.num_symbols());
            for (int k = 0; k < users; ++k) {
                CVec reduced = sh.reduce(CVec(beta * v1.row(k).transpose()));
                project_stream(reduced, regions, k, sh.num_symbols(), sh.real_symbols(),
                               s_fit, scratch);
                s_all.row(k) = s_fit.transpose();
            }
            double num = 0.0;
            for (int k = 0; k < users; ++k) {
                CVec gs = sh.expand(s_all.row(k).transpose());
                num += (gs.conjugate().cwiseProduct(v1.row(k).transpose())).sum().real();
            }
            double den = v1.squaredNorm() + users * m * problem.sigma_n_sq;
            if (den > 0.0 && std::isfinite(num)) beta = num / den;
        }

        CMat xh(ants, m);
        for (int t = 0; t < m; ++t)
            for (int n = 0; n < ants; ++n) xh(n, t) = phase_project(x(n, t), problem.alphabet);
        double cost = block_cost(xh, beta, problem, regions);
        st.cost_trace.push_back(cost);

        if (cost < best_cost) {
            best_cost = cost;
            best_x = xh;
            best_beta = beta;
        }
        if (config.iter_callback)
            config.iter_callback(IterInfo{iter, cost, best_cost, beta, gamma});

        gamma = std::min(gamma * config.anneal.rate, config.anneal.gamma_max);
        st.iterations = iter;
        best_hist.push_back(best_cost);
        if (config.rel_tol > 0.0 &&
            static_cast<int>(best_hist.size()) > config.stall_window) {
            double ref = best_hist[best_hist.size() - 1 - config.stall_window];
            if (ref - best_cost <= config.rel_tol * std::max(std::fabs(ref), 1e-30)) break;
        }
    }

    BlockResult res;
    res.x_time = best_x;
    res.beta = best_beta;
    st.x = Eigen::Map<const CVec>(best_x.data(), best_x.size());
    st.x_soft = Eigen::Map<const CVec>(x.data(), x.size());
    st.z = Eigen::Map<const CVec>(z.data(), z.size());
    st.theta = RVec::Constant(1, theta);
    st.xi = xi;
    st.beta = best_beta;
    st.best_cost = best_cost;
    res.state = std::move(st);
    return res;
}

double block_genie_beta(const CMat& x_time, const WidebandChannel& channel,
                        const Shaper& shaper, const std::vector<AceRegion>& regions,
                        double sigma_n_sq, int iters, double beta0) {
    const int users = channel.users();
    const int m = channel.dft_length();
    CMat v1 = block_forward(x_time, channel, 1.0);
    const double den = v1.squaredNorm() + users * m * sigma_n_sq;
    if (!(den > 0.0)) return beta0;
    double beta = beta0;
    CVec s;
    double scratch = 0.0;
    for (int it = 0; it < iters; ++it) {
        double num = 0.0;
        for (int k = 0; k < users; ++k) {
            CVec reduced = shaper.reduce(CVec(beta * v1.row(k).transpose()));
            project_stream(reduced, regions, k, shaper.num_symbols(), shaper.real_symbols(),
                           s, scratch);
            CVec gs = shaper.expand(s);
            num += (gs.conjugate().cwiseProduct(v1.row(k).transpose())).sum().real();
        }
        double next = num / den;
        if (std::fabs(next - beta) < 1e-14 * std::max(1.0, std::fabs(beta))) {
            beta = next;
            break;
        }
        beta = next;
    }
    return beta;
}

} // namespace precode
