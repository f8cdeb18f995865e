#ifndef PRECODE_CONSTELLATION_HPP
#define PRECODE_CONSTELLATION_HPP

#include <array>
#include <vector>

#include "precode/types.hpp"

namespace precode {

/// Modulation alphabet: P-PSK on the unit circle, or square L^2-QAM on the
/// odd-integer grid {+-1, +-3, ..., +-(L-1)} per axis (unnormalized; the
/// receiver gain beta absorbs scaling). QPSK is qam(2), points {+-1 +-j}.
class Constellation {
public:
    enum class Kind { kPsk, kQam };

    static Constellation psk(int num_points);
    static Constellation qam(int levels_per_axis);
    static Constellation qpsk() { return qam(2); }

    Kind kind() const { return kind_; }
    int order() const { return order_; } // P for PSK, L for QAM
    int size() const { return static_cast<int>(points_.size()); }
    const std::vector<cplx>& points() const { return points_; }
    cplx point(int i) const { return points_[static_cast<size_t>(i)]; }
    double sigma_d_sq() const { return sigma_d_sq_; }
    int bits_per_symbol() const;

private:
    Kind kind_;
    int order_;
    std::vector<cplx> points_;
    double sigma_d_sq_;
};

/// Extended (ACE) region S(d) of a constellation point, Euclidean-projectable
/// in closed form. Square QAM regions are axis-aligned: each real axis is
/// fixed at the symbol coordinate, lower-bounded by it (coordinate +(L-1)),
/// or upper-bounded (coordinate -(L-1)). PSK regions are the wedge cut by
/// half-planes against the angular neighbors (one half-plane for BPSK);
/// the neighbor constraints dominate all others in the defining inequality.
struct AceRegion {
    enum class Axis { kFixed, kLowerBounded, kUpperBounded, kFree };

    cplx anchor;                 // the symbol d itself
    bool axis_aligned = true;
    std::array<Axis, 2> axis{Axis::kFixed, Axis::kFixed}; // Re, Im
    int num_half_planes = 0;     // wedge form (PSK)
    std::array<cplx, 2> normals{}; // inward normals d - d'

    static AceRegion of(cplx d, const Constellation& cons);
};

/// Euclidean projection of u onto S(d) together with the diagonal of the
/// projection Jacobian (dRe s/dRe u, dIm s/dIm u). For axis-aligned regions
/// the slopes are exactly 0 or 1 (1 where u's coordinate was kept).
struct AceProjection {
    cplx s;
    double slope_re;
    double slope_im;
};

AceProjection ace_project(cplx u, const AceRegion& region);

/// Membership test straight from the defining inequalities
/// Re{(s - d)(d - d')*} >= 0 for every other constellation point d'.
/// Used as the oracle for ace_project.
bool in_extended_set(cplx s, cplx d, const Constellation& cons, double tol = 1e-9);

/// Nearest constellation point in Euclidean distance, ties to smallest index.
cplx hard_detect(cplx y, const Constellation& cons);
int hard_detect_index(cplx y, const Constellation& cons);

} // namespace precode

#endif
