#ifndef PRECODE_ALPHABET_HPP
#define PRECODE_ALPHABET_HPP

#include <vector>

#include "precode/types.hpp"

namespace precode {

/// The b-bit phase-only DAC output set: 2^b unit-magnitude points at angles
/// 2 pi (l + 1/2) / 2^b, l = 0 .. 2^b - 1. Per-antenna power is normalized
/// to one, and the set is symmetric (zero mean).
class PhaseAlphabet {
public:
    explicit PhaseAlphabet(int bits);

    int bits() const { return bits_; }
    int size() const { return static_cast<int>(points_.size()); }
    const std::vector<cplx>& points() const { return points_; }
    cplx point(int l) const { return points_[static_cast<size_t>(l)]; }

private:
    int bits_;
    std::vector<cplx> points_;
};

/// Nearest point of the alphabet in Euclidean distance. Ties (v on a bin
/// boundary, or v = 0) resolve to the smallest index.
cplx phase_project(cplx v, const PhaseAlphabet& alphabet);

/// Gibbs-smoothed projection (Softmax relaxation of phase_project) with
/// inverse temperature gamma:
///   value = sum_x x exp(-(gamma/xi) |xi x - v|^2) / sum_x exp(...)
/// slope is the Wirtinger derivative of value w.r.t. v. For a unit-modulus
/// alphabet the covariance form collapses to gamma (1 - |value|^2).
struct SoftProjection {
    cplx value;
    cplx slope;
};

enum class InputSlopeMode {
    kGibbs,           // analytic derivative of the Gibbs average
    kInverseMagnitude // f' ~ 1/(2|v|), the constant-envelope limit rule
};

SoftProjection phase_soft_project(cplx v, double xi, double gamma,
                                  const PhaseAlphabet& alphabet,
                                  InputSlopeMode mode = InputSlopeMode::kGibbs);

} // namespace precode

#endif
