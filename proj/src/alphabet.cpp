#include "precode/alphabet.hpp"

#include <cmath>
#include <stdexcept>

namespace precode {

PhaseAlphabet::PhaseAlphabet(int bits) : bits_(bits) {
    if (bits < 1 || bits > 16)
        throw std::invalid_argument("PhaseAlphabet: bits must be in [1, 16]");
    const int n = 1 << bits;
    points_.resize(static_cast<size_t>(n));
    for (int l = 0; l < n; ++l) {
        double ang = 2.0 * kPi * (l + 0.5) / n;
        points_[static_cast<size_t>(l)] = {std::cos(ang), std::sin(ang)};
    }
}

cplx phase_project(cplx v, const PhaseAlphabet& alphabet) {
    const auto& pts = alphabet.points();
    size_t best = 0;
    double best_d = std::norm(pts[0] - v);
    for (size_t l = 1; l < pts.size(); ++l) {
        double d = std::norm(pts[l] - v);
        if (d < best_d) { // strict: ties keep the smaller index
            best_d = d;
            best = l;
        }
    }
    return pts[best];
}

SoftProjection phase_soft_project(cplx v, double xi, double gamma,
                                  const PhaseAlphabet& alphabet,
                                  InputSlopeMode mode) {
    if (!(xi > 0.0)) throw std::invalid_argument("phase_soft_project: xi must be > 0");
    if (gamma < 0.0) throw std::invalid_argument("phase_soft_project: gamma must be >= 0");

    const auto& pts = alphabet.points();
    const size_t n = pts.size();

    // |xi x - v|^2 = xi^2 + |v|^2 - 2 xi Re(x* v) for |x| = 1; only the cross
    // term depends on x, so the exponents reduce to 2 gamma Re(x* v). Max is
    // subtracted before exponentiating to keep the weights finite.
    double emax = -1e300;
    std::vector<double> expo(n);
    for (size_t l = 0; l < n; ++l) {
        expo[l] = 2.0 * gamma * (pts[l].real() * v.real() + pts[l].imag() * v.imag());
        if (expo[l] > emax) emax = expo[l];
    }
    double wsum = 0.0;
    cplx xsum = 0.0;
    for (size_t l = 0; l < n; ++l) {
        double w = std::exp(expo[l] - emax);
        wsum += w;
        xsum += w * pts[l];
    }
    SoftProjection out;
    out.value = xsum / wsum;

    if (mode == InputSlopeMode::kInverseMagnitude) {
        double mag = std::abs(v);
        double s = (mag > 5e-7) ? 0.5 / mag : 1e6; // clip near v = 0
        out.slope = s;
    } else {
        out.slope = gamma * (1.0 - std::norm(out.value));
    }
    return out;
}

} // namespace precode
