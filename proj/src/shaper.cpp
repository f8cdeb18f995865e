#include "precode/shaper.hpp"

#include <cmath>
#include <stdexcept>

#include "precode/fft.hpp"

namespace precode {

// root-raised-cosine magnitude at frequency f in symbol-rate units
static double rrc_profile(double f, double roll_off) {
    const double a = std::fabs(f);
    const double lo = 0.5 * (1.0 - roll_off);
    const double hi = 0.5 * (1.0 + roll_off);
    if (a <= lo) return 1.0;
    if (a >= hi) return 0.0;
    return std::cos(kPi / (2.0 * roll_off) * (a - lo));
}

Shaper Shaper::build(Kind kind, int block_len, double roll_off) {
    if (block_len < 4 || block_len % 4 != 0)
        throw std::invalid_argument("Shaper: block length must be a multiple of 4");
    Shaper sh;
    sh.kind_ = kind;
    sh.block_len_ = block_len;
    const int m = block_len;

    if (kind == Kind::kOfdmCp) {
        // Table-I selector read in centered ordering: symbols fill the
        // center M/2 tones.
        sh.profile_ = RVec::Zero(m);
        sh.tone_of_symbol_.resize(static_cast<size_t>(m / 2));
        for (int k = 0; k < m / 2; ++k) {
            int unshifted = (k < m / 4) ? k : k + m / 2;
            int idx = (unshifted + m / 2) % m;
            sh.tone_of_symbol_[static_cast<size_t>(k)] = idx;
            sh.profile_(idx) = 1.0;
        }
        return sh;
    }

    // CP-SC and OQAM-SC carry a spectral profile over all M tones.
    // roll_off <= 0 selects the flat profile (for OQAM this also makes the
    // complex Gram exactly I; with an RRC profile OQAM keeps the real-field
    // orthogonality Re{G^H G} = I).
    sh.profile_ = RVec(m);
    if (roll_off <= 0.0) {
        sh.profile_.setOnes();
    } else {
        for (int i = 0; i < m; ++i) {
            double f = 2.0 * (i - m / 2) / m;
            sh.profile_(i) = rrc_profile(f, roll_off);
        }
    }

    // renormalize per alias class (tones m and m - M/2 fold onto each other)
    // so that the folded squared profile is exactly flat: sum Lambda^2 = M/2
    // and the Gram identity holds to machine precision.
    for (int j = 0; j < m / 2; ++j) {
        int i1 = j + m / 2; // tone j
        int i2 = j;         // tone j - M/2
        double fold = sh.profile_(i1) * sh.profile_(i1) + sh.profile_(i2) * sh.profile_(i2);
        if (fold < 1e-12) {
            sh.profile_(i1) = 1.0;
            fold = 1.0;
        }
        double scale = 1.0 / std::sqrt(fold);
        sh.profile_(i1) *= scale;
        sh.profile_(i2) *= scale;
    }
    return sh;
}

CVec Shaper::expand(const CVec& s) const {
    const int m = block_len_;
    if (s.size() != num_symbols())
        throw std::invalid_argument("Shaper::expand: wrong symbol count");

    if (kind_ == Kind::kOfdmCp) {
        CVec y = CVec::Zero(m);
        for (int k = 0; k < m / 2; ++k) y(tone_of_symbol_[static_cast<size_t>(k)]) = s(k);
        return y;
    }
    if (kind_ == Kind::kCpSc) {
        CVec shat = centered_dft(s); // length M/2, tones -M/4 .. M/4-1
        CVec y(m);
        for (int i = 0; i < m; ++i) {
            int tone = i - m / 2;
            int idx = ((tone + m / 4) % (m / 2) + m / 2) % (m / 2);
            y(i) = profile_(i) * shat(idx);
        }
        return y;
    }
    // OQAM: real symbol c occupies samples 2c (real rail) and 2c+1 (j rail)
    CVec staggered(m);
    for (int c = 0; c < m / 2; ++c) {
        staggered(2 * c) = s(c).real();
        staggered(2 * c + 1) = cplx{0.0, s(c).real()};
    }
    CVec y = centered_dft(staggered);
    return profile_.asDiagonal() * y;
}

CVec Shaper::reduce(const CVec& y) const {
    const int m = block_len_;
    if (y.size() != m) throw std::invalid_argument("Shaper::reduce: wrong tone count");

    if (kind_ == Kind::kOfdmCp) {
        CVec s(m / 2);
        for (int k = 0; k < m / 2; ++k) s(k) = y(tone_of_symbol_[static_cast<size_t>(k)]);
        return s;
    }
    if (kind_ == Kind::kCpSc) {
        CVec acc = CVec::Zero(m / 2);
        for (int i = 0; i < m; ++i) {
            int tone = i - m / 2;
            int idx = ((tone + m / 4) % (m / 2) + m / 2) % (m / 2);
            acc(idx) += profile_(i) * y(i);
        }
        return centered_idft(acc);
    }
    CVec weighted = profile_.asDiagonal() * y;
    CVec tau = centered_idft(weighted);
    CVec s(m / 2);
    for (int c = 0; c < m / 2; ++c)
        s(c) = tau(2 * c).real() + tau(2 * c + 1).imag(); // Re{G^H y}
    return s;
}

CMat Shaper::dense() const {
    const int m = block_len_;
    CMat g = CMat::Zero(m, num_symbols());
    CVec e = CVec::Zero(num_symbols());
    for (int c = 0; c < num_symbols(); ++c) {
        e(c) = 1.0;
        g.col(c) = expand(e);
        e(c) = 0.0;
    }
    return g;
}

} // namespace precode
