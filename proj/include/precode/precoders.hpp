#ifndef PRECODE_PRECODERS_HPP
#define PRECODE_PRECODERS_HPP

#include "precode/block.hpp"
#include "precode/gamp.hpp"

namespace precode {

/// Quantized linear zero-forcing baseline: x = prox_X(H^H (H H^H)^{-1} d)
/// entrywise after unit-power normalization (pseudo-inverse with tolerance
/// when H H^H is singular). The reported beta follows the same genie rule as
/// the nonlinear runs (exact alternation on the MSE cost).
struct ZfResult {
    CVec x;
    double beta;
};

ZfResult quantized_zf_precoder(const FlatChannel& channel, const CVec& data,
                               const PhaseAlphabet& alphabet,
                               const std::vector<AceRegion>& regions,
                               double sigma_n_sq);

/// Per-tone quantized ZF for the block problem: linear pre-equalization to
/// the shaped target (G (x) I_K) s, inverse DFT, entrywise phase projection.
struct BlockLinearResult {
    CMat x_time; // N x M
    double beta;
};

BlockLinearResult quantized_zf_block(const WidebandChannel& channel, const CMat& data,
                                     const Shaper& shaper, const PhaseAlphabet& alphabet,
                                     const std::vector<AceRegion>& regions,
                                     double sigma_n_sq);

/// Unconstrained least-squares precoder (no DAC constraint): received signal
/// equals the shaped target exactly for K <= N. Pipeline sanity reference.
BlockLinearResult ideal_block_precoder(const WidebandChannel& channel, const CMat& data,
                                       const Shaper& shaper);

} // namespace precode

#endif
