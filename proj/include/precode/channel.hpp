#ifndef PRECODE_CHANNEL_HPP
#define PRECODE_CHANNEL_HPP

#include <string>
#include <vector>

#include "precode/rng.hpp"
#include "precode/types.hpp"

namespace precode {

/// Flat narrowband channel: K users x N antennas, y = H x + n.
struct FlatChannel {
    CMat h; // K x N
    int users() const { return static_cast<int>(h.rows()); }
    int antennas() const { return static_cast<int>(h.cols()); }
};

/// Frequency-selective channel described per tone, centered tone ordering:
/// per_tone[i] is H[m] with m = i - M/2.
struct WidebandChannel {
    std::vector<CMat> per_tone; // M matrices, each K x N
    double sample_interval = 0.0; // Ts, seconds (0 if synthetic)
    double carrier_hz = 0.0;      // fc (0 if synthetic)

    int dft_length() const { return static_cast<int>(per_tone.size()); }
    int users() const { return per_tone.empty() ? 0 : static_cast<int>(per_tone[0].rows()); }
    int antennas() const { return per_tone.empty() ? 0 : static_cast<int>(per_tone[0].cols()); }
    const CMat& tone(int m) const { return per_tone[static_cast<size_t>(m + dft_length() / 2)]; }
};

/// One propagation path: complex gain, angle-of-departure, delay.
struct Ray {
    cplx gain;
    double aod_rad;
    double delay_s;
};

/// Per-user path lists for the ray-based wideband model.
struct RayParams {
    std::vector<std::vector<Ray>> per_user;
};

/// IID circular Gaussian entries with variance 1/N.
FlatChannel draw_iid_flat(int users, int antennas, RngStream& rng);

/// Broadband ULA frequency response, entry n = exp(-j pi cos(phi) n (m/(M Ts fc) + 1)).
/// Tone index m runs from -M/2 to M/2-1.
CVec ula_response(int tone, double aod_rad, int antennas, int dft_length,
                  double sample_interval, double carrier_hz);

/// Assemble h_k[m] = sum_l gain_l a_ULA(m, aod_l) exp(-j 2 pi m delay_l / (M Ts)).
WidebandChannel draw_ray_channel(const RayParams& params, int antennas, int dft_length,
                                 double sample_interval, double carrier_hz);

/// Draw the ray parameters used by the wideband experiments: per user,
/// num_paths rays with gains CN(0, 1/num_paths), AoD uniform in [0, pi),
/// delays uniform in [0, max_delay_samples * Ts].
RayParams draw_ray_params(int users, int num_paths, double max_delay_samples,
                          double sample_interval, RngStream& rng);

/// Block-fading wideband channel: one IID flat draw repeated on every tone.
WidebandChannel block_fading_from_flat(const FlatChannel& flat, int dft_length);

/// Geometric block-fading channel for a square planar array with element
/// spacing `spacing_over_lambda` wavelengths: each user is a superposition of
/// num_paths far-field plane waves with directions uniform over the upper
/// hemisphere and gains CN(0, 1/num_paths). Rows live in the propagating
/// subspace of the matching coupling matrix, which is what the total-radiated-
/// power experiments need.
FlatChannel draw_planar_ray_flat(int users, int side, double spacing_over_lambda,
                                 int num_paths, RngStream& rng);

/// JSON fixture container (dimensions, tone order, interleaved re/im floats).
std::string channel_to_json(const WidebandChannel& ch);
WidebandChannel channel_from_json(const std::string& text);
std::string channel_to_json(const FlatChannel& ch);
FlatChannel flat_channel_from_json(const std::string& text);

} // namespace precode

#endif
