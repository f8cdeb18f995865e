#ifndef PRECODE_BLOCK_HPP
#define PRECODE_BLOCK_HPP

#include "precode/gamp.hpp"
#include "precode/shaper.hpp"

namespace precode {

/// Joint precoding + OTA spectral shaping problem over one block of M
/// samples (M/2 data symbols per user). Data is stored K x M/2 (column c =
/// the K users' c-th symbols); for OQAM the entries are real PAM levels.
struct BlockProblem {
    const WidebandChannel* channel = nullptr;
    CMat data; // K x M/2
    double sigma_n_sq = 0.0;
    Constellation constellation = Constellation::qam(4);
    PhaseAlphabet alphabet{2};
    const Shaper* shaper = nullptr;
    bool use_ace = true;
    bool update_beta = true;
    double beta0 = 1.0;
};

/// A = beta Diag(H[-M/2] .. H[M/2-1]) (F_M (x) I_N) applied without ever
/// materializing the matrix. x is stacked time-major (N entries per sample),
/// the result tone-major (K entries per tone). Cost O(N M log M + K N M).
CVec apply_block_operator(const CVec& x, const WidebandChannel& channel, double beta);
CVec apply_block_operator_adjoint(const CVec& y, const WidebandChannel& channel, double beta);

/// Matrix views of the same maps: X is N x M (column = time sample),
/// the result K x M (column = tone).
CMat block_forward(const CMat& x_time, const WidebandChannel& channel, double beta);
CMat block_adjoint(const CMat& y_tones, const WidebandChannel& channel, double beta);

/// Generalized output step, Eq.-(38) shape: per user stream apply the matched
/// filter G^H, ACE-project the symbol estimates, re-expand through G:
///   z = ((G (x) I_K) prox_{S(d)}((G (x) I_K)^H u) - u) / (1 + theta).
/// trace_slope = tr(grad g) / (MK), computed from the clamp slopes alone
/// (G-conjugation leaves the trace invariant because G is orthonormal).
struct BlockOutput {
    CMat z; // K x M
    double trace_slope;
};

BlockOutput block_output_step(const CMat& u_tones, const CMat& data,
                              const std::vector<AceRegion>& regions, double theta,
                              const Shaper& shaper);

/// Closed-form receiver gain refit for fixed precoder output:
/// beta = Re{s^H (G (x) I)^H Diag(H) (F (x) I) x} / (||Diag(H)(F (x) I)x||^2 + K M sigma_n^2).
double update_beta(const CMat& x_time, const CMat& s_symbols, const Shaper& shaper,
                   const WidebandChannel& channel, double sigma_n_sq);

/// Eq.-(35) cost of a candidate block output (inner ACE minimization in
/// closed form).
double block_cost(const CMat& x_time, double beta, const BlockProblem& problem,
                  const std::vector<AceRegion>& regions);

/// Regions of a K x (M/2) data block, user-major (index k * (M/2) + c).
/// real_symbols selects the OQAM single-rail clamp.
std::vector<AceRegion> block_data_regions(const CMat& data, const Constellation& cons,
                                          bool use_ace, bool real_symbols);

/// Exact alternating (beta, s) refit on the block cost for fixed x.
double block_genie_beta(const CMat& x_time, const WidebandChannel& channel,
                        const Shaper& shaper, const std::vector<AceRegion>& regions,
                        double sigma_n_sq, int iters = 30, double beta0 = 1.0);

struct BlockResult {
    CMat x_time;  // N x M, every entry in X
    double beta;
    GampState state; // messages, trace, iteration count
};

/// Algorithm-1 recursion with the generalized output step, scalar curvature
/// messages (uniform trace approximation), and a beta refit per iteration.
BlockResult run_block_gamp(const BlockProblem& problem, const GampConfig& config);

} // namespace precode

#endif
