#include "precode/constellation.hpp"

#include <cmath>
#include <stdexcept>

namespace precode {

Constellation Constellation::psk(int num_points) {
    if (num_points < 2) throw std::invalid_argument("psk: need at least 2 points");
    Constellation c;
    c.kind_ = Kind::kPsk;
    c.order_ = num_points;
    c.points_.resize(static_cast<size_t>(num_points));
    for (int p = 0; p < num_points; ++p) {
        double ang = 2.0 * kPi * p / num_points;
        c.points_[static_cast<size_t>(p)] = {std::cos(ang), std::sin(ang)};
    }
    c.sigma_d_sq_ = 1.0;
    return c;
}

Constellation Constellation::qam(int levels_per_axis) {
    if (levels_per_axis < 2 || levels_per_axis % 2 != 0)
        throw std::invalid_argument("qam: levels per axis must be even and >= 2");
    Constellation c;
    c.kind_ = Kind::kQam;
    c.order_ = levels_per_axis;
    const int l = levels_per_axis;
    c.points_.reserve(static_cast<size_t>(l) * l);
    double pow_sum = 0.0;
    for (int i = 0; i < l; ++i) {
        for (int q = 0; q < l; ++q) {
            double re = 2 * i - (l - 1);
            double im = 2 * q - (l - 1);
            c.points_.push_back({re, im});
            pow_sum += re * re + im * im;
        }
    }
    c.sigma_d_sq_ = pow_sum / (l * l); // equals 2 (L^2 - 1) / 3
    return c;
}

int Constellation::bits_per_symbol() const {
    int n = size();
    int b = 0;
    while ((1 << b) < n) ++b;
    return b;
}

static bool near(double a, double b) { return std::fabs(a - b) < 1e-9; }

AceRegion AceRegion::of(cplx d, const Constellation& cons) {
    AceRegion r;
    r.anchor = d;
    if (cons.kind() == Constellation::Kind::kQam) {
        const double edge = cons.order() - 1;
        r.axis_aligned = true;
        auto classify = [&](double v) {
            if (near(v, edge)) return Axis::kLowerBounded;
            if (near(v, -edge)) return Axis::kUpperBounded;
            return Axis::kFixed;
        };
        r.axis[0] = classify(d.real());
        r.axis[1] = classify(d.imag());
        return r;
    }
    // PSK: half-planes against the angular neighbors, normals d - d'.
    r.axis_aligned = false;
    const auto& pts = cons.points();
    const int p = cons.size();
    int idx = -1;
    for (int i = 0; i < p; ++i)
        if (near(pts[static_cast<size_t>(i)].real(), d.real()) &&
            near(pts[static_cast<size_t>(i)].imag(), d.imag()))
            idx = i;
    if (idx < 0) throw std::invalid_argument("AceRegion: d is not a constellation point");
    if (p == 2) {
        r.num_half_planes = 1;
        r.normals[0] = d - pts[static_cast<size_t>((idx + 1) % 2)];
    } else {
        r.num_half_planes = 2;
        r.normals[0] = d - pts[static_cast<size_t>((idx + 1) % p)];
        r.normals[1] = d - pts[static_cast<size_t>((idx + p - 1) % p)];
    }
    return r;
}

static double dot2(cplx a, cplx b) { return a.real() * b.real() + a.imag() * b.imag(); }

AceProjection ace_project(cplx u, const AceRegion& region) {
    AceProjection out;
    if (region.axis_aligned) {
        auto clamp_axis = [](double u_ax, double v, AceRegion::Axis a, double& slope) {
            switch (a) {
                case AceRegion::Axis::kFixed: slope = 0.0; return v;
                case AceRegion::Axis::kLowerBounded:
                    if (u_ax >= v) { slope = 1.0; return u_ax; }
                    slope = 0.0; return v;
                case AceRegion::Axis::kUpperBounded:
                    if (u_ax <= v) { slope = 1.0; return u_ax; }
                    slope = 0.0; return v;
                case AceRegion::Axis::kFree: slope = 1.0; return u_ax;
            }
            slope = 0.0; return v;
        };
        double re = clamp_axis(u.real(), region.anchor.real(), region.axis[0], out.slope_re);
        double im = clamp_axis(u.imag(), region.anchor.imag(), region.axis[1], out.slope_im);
        out.s = {re, im};
        return out;
    }

    // Wedge with apex d: candidates are u itself, the projection onto one
    // active half-plane boundary, or the apex.
    const cplx t = u - region.anchor;
    bool inside = true;
    for (int i = 0; i < region.num_half_planes; ++i)
        if (dot2(t, region.normals[static_cast<size_t>(i)]) < 0.0) inside = false;
    if (inside) {
        out.s = u;
        out.slope_re = 1.0;
        out.slope_im = 1.0;
        return out;
    }
    for (int i = 0; i < region.num_half_planes; ++i) {
        cplx n = region.normals[static_cast<size_t>(i)];
        double nn = dot2(n, n);
        cplx proj = t - (dot2(t, n) / nn) * n;
        bool feasible = true;
        for (int k = 0; k < region.num_half_planes; ++k)
            if (k != i && dot2(proj, region.normals[static_cast<size_t>(k)]) < -1e-15)
                feasible = false;
        if (dot2(t, n) < 0.0 && feasible) {
            out.s = region.anchor + proj;
            cplx nh = n / std::sqrt(nn);
            out.slope_re = 1.0 - nh.real() * nh.real();
            out.slope_im = 1.0 - nh.imag() * nh.imag();
            return out;
        }
    }
    out.s = region.anchor; // apex
    out.slope_re = 0.0;
    out.slope_im = 0.0;
    return out;
}

bool in_extended_set(cplx s, cplx d, const Constellation& cons, double tol) {
    for (const cplx& dp : cons.points()) {
        if (std::norm(dp - d) < 1e-18) continue;
        cplx diff = d - dp;
        double lhs = ((s - d) * std::conj(diff)).real();
        if (lhs < -tol) return false;
    }
    return true;
}

int hard_detect_index(cplx y, const Constellation& cons) {
    const auto& pts = cons.points();
    int best = 0;
    double best_d = std::norm(pts[0] - y);
    for (int i = 1; i < cons.size(); ++i) {
        double dd = std::norm(pts[static_cast<size_t>(i)] - y);
        if (dd < best_d) {
            best_d = dd;
            best = i;
        }
    }
    return best;
}

cplx hard_detect(cplx y, const Constellation& cons) {
    return cons.point(hard_detect_index(y, cons));
}

} // namespace precode
