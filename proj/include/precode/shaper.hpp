#ifndef PRECODE_SHAPER_HPP
#define PRECODE_SHAPER_HPP

#include <vector>

#include "precode/types.hpp"

namespace precode {

/// Over-the-air spectral shaping matrix G (M tones x M/2 data symbols) at two
/// samples per symbol, in centered tone ordering.
///
///   OFDM-CP : selector placing the M/2 symbols on the center M/2 tones
///   CP-SC   : Lambda . [F_{M/2}; F_{M/2}] (replicated symbol spectrum times
///             a root-raised-cosine profile)
///   OQAM-SC : (Lambda F_M) . (I_{M/2} (x) [1; j]) for real-valued symbols
///             (each real symbol staggered over two samples, quadrature rails)
///
/// The profile is renormalized per alias class so that G^H G = I_{M/2} holds
/// exactly for OFDM-CP and CP-SC. For OQAM-SC the identity holds in the field
/// where the data lives: Re{G^H G} = I for any Nyquist profile, and the
/// complex Gram is also I for the flat (default) profile.
class Shaper {
public:
    enum class Kind { kOfdmCp, kCpSc, kOqamSc };

    static Shaper build(Kind kind, int block_len, double roll_off = 0.22);

    Kind kind() const { return kind_; }
    int block_len() const { return block_len_; }
    int num_symbols() const { return block_len_ / 2; }
    bool real_symbols() const { return kind_ == Kind::kOqamSc; }
    const RVec& profile() const { return profile_; }

    /// G s: symbols -> M tones.
    CVec expand(const CVec& s) const;
    /// Matched filter: G^H y for complex-symbol kinds, Re{G^H y} for OQAM.
    CVec reduce(const CVec& y) const;
    /// Explicit M x M/2 matrix (test oracle; the apply paths never build it).
    CMat dense() const;

private:
    Kind kind_ = Kind::kOfdmCp;
    int block_len_ = 0;
    RVec profile_;                    // Lambda over centered tones
    std::vector<int> tone_of_symbol_; // OFDM selector
};

} // namespace precode

#endif
