#ifndef PRECODE_HARNESS_HPP
#define PRECODE_HARNESS_HPP

#include <atomic>
#include <cstdint>
#include <vector>

#include "precode/coupling.hpp"
#include "precode/precoders.hpp"
#include "precode/psd.hpp"
#include "precode/sevo.hpp"

namespace precode {

struct ExperimentConfig {
    enum class Kind { kFlatSweep, kBlockSweep, kSevoCurve, kOtaSpectrum, kTrpSpectrum };
    enum class Crit { kMseAce, kMseNoAce, kSer };
    enum class Precoder { kGamp, kZf, kIdeal };
    enum class ChannelModel { kIidFlat, kRayWideband, kPlanarRay };

    Kind kind = Kind::kFlatSweep;
    int antennas = 40;
    int users = 20;
    int bits = 2;
    int block_len = 256; // M, block experiments only
    Constellation constellation = Constellation::qpsk();
    Crit criterion = Crit::kMseAce;
    Precoder precoder = Precoder::kGamp;
    std::vector<double> snr_db{0, 2, 4, 6, 8, 10};
    int channels = 100;           // channel realizations per point
    int vectors_per_channel = 1;  // symbol vectors (flat) / blocks (block)
    std::uint64_t seed = 1;
    GampConfig gamp;

    Shaper::Kind shaper_kind = Shaper::Kind::kOfdmCp;
    double roll_off = 0.22; // <= 0 selects the flat profile
    ChannelModel channel_model = ChannelModel::kIidFlat;
    int num_paths = 10;
    double max_delay_samples = 50.0;
    double sample_rate_hz = 7e9;
    double carrier_hz = 60.5e9;

    int array_side = 8; // TRP experiments: N = side^2
    double spacing_over_lambda = 0.5;

    std::vector<int> bits_list{1, 2, 3, 0}; // sevo-curve; 0 = infinite resolution
    double ratio = 0.0;                     // sevo-curve K/N; 0 -> users/antennas

    long min_error_count = 100; // rates with fewer errors are flagged unreliable
    int max_extend_factor = 10; // auto-extension cap (multiples of `channels`)
    int workers = 0;            // 0: PRECODE_WORKERS env, else hardware threads
};

struct SweepPoint {
    double snr_db = 0.0;
    double ebn0_db = 0.0;
    double ser = 0.0;
    double ber = 0.0;
    double mse = 0.0;
    long symbol_errors = 0;
    long bit_errors = 0;
    long symbols = 0;
    long bits_counted = 0;
    double mean_iterations = 0.0;
    double wall_seconds = 0.0;
    bool reliable = true;
    double ser_se = 0.0; // analytic state-evolution companions (NaN if n/a)
    double ber_se = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    bool interrupted = false;
};

/// Monte Carlo error-rate sweep (flat or block, per config.kind). Trials run
/// on a worker pool with counter-addressed substreams: results are bit-exact
/// regardless of the worker count. Points with fewer than min_error_count
/// symbol errors auto-extend the trial budget up to max_extend_factor.
SweepResult monte_carlo_sweep(const ExperimentConfig& config,
                              const std::atomic<bool>* interrupt = nullptr);

/// Analytic companion of a sweep point (state-evolution fixed point with the
/// criterion's beta handling).
SePoint se_companion(const ExperimentConfig& config, double snr_linear);

struct SpectrumResult {
    RVec freq;            // cycles/sample, centered
    RVec psd;             // mean PSD (linear power per bin)
    double aclr_db = 0.0; // OTA only
    double in_band = 0.0;
    double out_of_band = 0.0;
    double mean_power = 0.0;
    double parseval_rel_err = 0.0;
    bool interrupted = false;
};

/// OTA spectrum: noiseless received time sequences at the users, Welch
/// averaged over users, blocks and channels.
SpectrumResult ota_psd(const ExperimentConfig& config,
                       const std::atomic<bool>* interrupt = nullptr);

/// Total radiated power spectral density x^H B x per tone, averaged over
/// blocks and channels, with the planar-array coupling kernel from config.
SpectrumResult trp_psd(const ExperimentConfig& config, const CouplingMatrix& coupling,
                       const std::atomic<bool>* interrupt = nullptr);
SpectrumResult trp_psd(const ExperimentConfig& config,
                       const std::atomic<bool>* interrupt = nullptr);

/// Analytic achievable-rate curves C(snr) per DAC resolution (closed form).
struct SevoCurve {
    std::vector<double> snr_db;
    std::vector<int> bits;  // 0 = infinite resolution
    RMat capacity;          // rows = snr points, cols = bits entries
    RMat theta_opt;
};
SevoCurve sevo_curve(const ExperimentConfig& config);

int resolve_workers(int requested);

} // namespace precode

#endif
