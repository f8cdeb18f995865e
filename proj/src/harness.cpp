#include "precode/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "precode/fft.hpp"

namespace precode {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            while (true) {
                int i = next.fetch_add(1);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct TrialCounts {
    long sym_err = 0;
    long bit_err = 0;
    long symbols = 0;
    long bits = 0;
    double mse_acc = 0.0;
    long iters = 0;
    long gamp_runs = 0;

    void operator+=(const TrialCounts& o) {
        sym_err += o.sym_err;
        bit_err += o.bit_err;
        symbols += o.symbols;
        bits += o.bits;
        mse_acc += o.mse_acc;
        iters += o.iters;
        gamp_runs += o.gamp_runs;
    }
};

int pam_detect_index(double v, int levels) {
    int idx = static_cast<int>(std::lround((v + levels - 1) / 2.0));
    return std::max(0, std::min(levels - 1, idx));
}

bool sign_mismatch(double a, double b) { return (a >= 0.0) != (b >= 0.0); }

// one flat channel realization with cfg.vectors_per_channel symbol vectors
TrialCounts flat_trial(const ExperimentConfig& cfg, double sigma2,
                       const RngStream& trial_root) {
    RngStream h_stream = trial_root.substream(0);
    FlatChannel ch = draw_iid_flat(cfg.users, cfg.antennas, h_stream);
    const Constellation& cons = cfg.constellation;
    const bool qpsk = cons.size() == 4 && cons.kind() == Constellation::Kind::kQam;
    PhaseAlphabet alphabet(cfg.bits);

    TrialCounts tc;
    for (int v = 0; v < cfg.vectors_per_channel; ++v) {
        RngStream vec_stream = trial_root.substream(static_cast<std::uint64_t>(v) + 1);
        std::vector<int> data_idx(static_cast<size_t>(cfg.users));
        CVec d(cfg.users);
        for (int k = 0; k < cfg.users; ++k) {
            data_idx[static_cast<size_t>(k)] =
                static_cast<int>(vec_stream.next_below(static_cast<std::uint64_t>(cons.size())));
            d(k) = cons.point(data_idx[static_cast<size_t>(k)]);
        }

        CVec x;
        double beta = 1.0;
        if (cfg.precoder == ExperimentConfig::Precoder::kZf) {
            auto regions = ace_regions_of(d, cons,
                                          cfg.criterion == ExperimentConfig::Crit::kMseAce);
            ZfResult zf = quantized_zf_precoder(ch, d, alphabet, regions, sigma2);
            x = zf.x;
            beta = zf.beta;
        } else if (cfg.criterion == ExperimentConfig::Crit::kSer) {
            SerProblem pb;
            pb.channel = &ch;
            pb.data = d;
            pb.sigma_n_sq = sigma2;
            pb.alphabet = alphabet;
            GampState st = run_gamp(pb, cfg.gamp);
            x = st.x;
            beta = st.beta;
            tc.iters += st.iterations;
            ++tc.gamp_runs;
        } else {
            MseProblem pb;
            pb.channel = &ch;
            pb.data = d;
            pb.sigma_n_sq = sigma2;
            pb.constellation = cons;
            pb.alphabet = alphabet;
            pb.use_ace = cfg.criterion == ExperimentConfig::Crit::kMseAce;
            GampState st = run_gamp(pb, cfg.gamp);
            x = st.x;
            beta = st.beta;
            tc.iters += st.iterations;
            ++tc.gamp_runs;
        }

        CVec y = ch.h * x;
        for (int k = 0; k < cfg.users; ++k) y(k) += vec_stream.next_cnormal(sigma2);

        // the receiver gain multiplies: beta H x targets s, so s_hat = beta y
        for (int k = 0; k < cfg.users; ++k) {
            cplx shat = beta * y(k);
            int det = hard_detect_index(shat, cons);
            ++tc.symbols;
            if (det != data_idx[static_cast<size_t>(k)]) ++tc.sym_err;
            tc.mse_acc += std::norm(shat - d(k));
            if (qpsk) {
                cplx p = cons.point(det);
                tc.bits += 2;
                if (sign_mismatch(p.real(), d(k).real())) ++tc.bit_err;
                if (sign_mismatch(p.imag(), d(k).imag())) ++tc.bit_err;
            }
        }
    }
    return tc;
}

WidebandChannel draw_block_channel(const ExperimentConfig& cfg, RngStream& stream) {
    switch (cfg.channel_model) {
        case ExperimentConfig::ChannelModel::kIidFlat: {
            FlatChannel flat = draw_iid_flat(cfg.users, cfg.antennas, stream);
            return block_fading_from_flat(flat, cfg.block_len);
        }
        case ExperimentConfig::ChannelModel::kRayWideband: {
            double ts = 1.0 / cfg.sample_rate_hz;
            RayParams params = draw_ray_params(cfg.users, cfg.num_paths,
                                               cfg.max_delay_samples, ts, stream);
            return draw_ray_channel(params, cfg.antennas, cfg.block_len, ts, cfg.carrier_hz);
        }
        case ExperimentConfig::ChannelModel::kPlanarRay: {
            if (cfg.array_side * cfg.array_side != cfg.antennas)
                throw std::invalid_argument("planar-ray channel: antennas must equal side^2");
            FlatChannel flat = draw_planar_ray_flat(cfg.users, cfg.array_side,
                                                    cfg.spacing_over_lambda, cfg.num_paths,
                                                    stream);
            return block_fading_from_flat(flat, cfg.block_len);
        }
    }
    throw std::logic_error("draw_block_channel: bad channel model");
}

struct BlockRun {
    CMat x_time;
    double beta = 1.0;
    int iterations = 0;
    bool gamp = false;
};

CMat draw_block_data(const ExperimentConfig& cfg, const Shaper& shaper, RngStream& stream,
                     Eigen::MatrixXi& indices) {
    const Constellation& cons = cfg.constellation;
    const int syms = shaper.num_symbols();
    CMat data(cfg.users, syms);
    indices.resize(cfg.users, syms);
    for (int k = 0; k < cfg.users; ++k)
        for (int c = 0; c < syms; ++c) {
            if (shaper.real_symbols()) {
                int levels = cons.order();
                int idx = static_cast<int>(stream.next_below(static_cast<std::uint64_t>(levels)));
                indices(k, c) = idx;
                data(k, c) = cplx{static_cast<double>(2 * idx - (levels - 1)), 0.0};
            } else {
                int idx = static_cast<int>(
                    stream.next_below(static_cast<std::uint64_t>(cons.size())));
                indices(k, c) = idx;
                data(k, c) = cons.point(idx);
            }
        }
    return data;
}

BlockRun run_block_precoder(const ExperimentConfig& cfg, const WidebandChannel& ch,
                            const Shaper& shaper, const CMat& data, double sigma2) {
    BlockRun out;
    const bool use_ace = cfg.criterion == ExperimentConfig::Crit::kMseAce;
    if (cfg.precoder == ExperimentConfig::Precoder::kIdeal) {
        BlockLinearResult r = ideal_block_precoder(ch, data, shaper);
        out.x_time = r.x_time;
        out.beta = r.beta;
        return out;
    }
    if (cfg.precoder == ExperimentConfig::Precoder::kZf) {
        auto regions =
            block_data_regions(data, cfg.constellation, use_ace, shaper.real_symbols());
        PhaseAlphabet alphabet(cfg.bits);
        BlockLinearResult r =
            quantized_zf_block(ch, data, shaper, alphabet, regions, sigma2);
        out.x_time = r.x_time;
        out.beta = r.beta;
        return out;
    }
    BlockProblem pb;
    pb.channel = &ch;
    pb.data = data;
    pb.sigma_n_sq = sigma2;
    pb.constellation = cfg.constellation;
    pb.alphabet = PhaseAlphabet(cfg.bits);
    pb.shaper = &shaper;
    pb.use_ace = use_ace;
    BlockResult r = run_block_gamp(pb, cfg.gamp);
    out.x_time = r.x_time;
    out.beta = r.beta;
    out.iterations = r.state.iterations;
    out.gamp = true;
    return out;
}

TrialCounts block_trial(const ExperimentConfig& cfg, const Shaper& shaper, double sigma2,
                        const RngStream& trial_root) {
    RngStream h_stream = trial_root.substream(0);
    WidebandChannel ch = draw_block_channel(cfg, h_stream);
    const Constellation& cons = cfg.constellation;
    const bool qpsk = !shaper.real_symbols() && cons.size() == 4 &&
                      cons.kind() == Constellation::Kind::kQam;
    const int m = cfg.block_len;

    TrialCounts tc;
    for (int v = 0; v < cfg.vectors_per_channel; ++v) {
        RngStream vec_stream = trial_root.substream(static_cast<std::uint64_t>(v) + 1);
        Eigen::MatrixXi indices;
        CMat data = draw_block_data(cfg, shaper, vec_stream, indices);
        BlockRun run = run_block_precoder(cfg, ch, shaper, data, sigma2);
        tc.iters += run.iterations;
        if (run.gamp) ++tc.gamp_runs;

        CMat y = block_forward(run.x_time, ch, 1.0);
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < cfg.users; ++k) y(k, i) += vec_stream.next_cnormal(sigma2);

        for (int k = 0; k < cfg.users; ++k) {
            CVec reduced = run.beta * shaper.reduce(CVec(y.row(k).transpose()));
            for (int c = 0; c < shaper.num_symbols(); ++c) {
                ++tc.symbols;
                if (shaper.real_symbols()) {
                    int det = pam_detect_index(reduced(c).real(), cons.order());
                    if (det != indices(k, c)) ++tc.sym_err;
                    double e = reduced(c).real() - data(k, c).real();
                    tc.mse_acc += e * e;
                } else {
                    int det = hard_detect_index(reduced(c), cons);
                    if (det != indices(k, c)) ++tc.sym_err;
                    tc.mse_acc += std::norm(reduced(c) - data(k, c));
                    if (qpsk) {
                        cplx p = cons.point(det);
                        tc.bits += 2;
                        if (sign_mismatch(p.real(), data(k, c).real())) ++tc.bit_err;
                        if (sign_mismatch(p.imag(), data(k, c).imag())) ++tc.bit_err;
                    }
                }
            }
        }
    }
    return tc;
}

} // namespace

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PRECODE_WORKERS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

SePoint se_companion(const ExperimentConfig& config, double snr_linear) {
    SeConfig sc;
    sc.bits = config.bits;
    sc.ratio = static_cast<double>(config.users) / config.antennas;
    sc.snr = snr_linear;
    sc.constellation = config.constellation;
    SePoint blank;
    blank.ser = kNaN;
    blank.ber = kNaN;
    switch (config.criterion) {
        case ExperimentConfig::Crit::kMseAce:
            if (config.constellation.kind() != Constellation::Kind::kQam) return blank;
            sc.criterion = SeCriterion::kMseAce;
            return optimize_beta(sc, BetaObjective::kMse);
        case ExperimentConfig::Crit::kMseNoAce:
            sc.criterion = SeCriterion::kMseNoAce;
            return optimize_beta(sc, BetaObjective::kMse);
        case ExperimentConfig::Crit::kSer:
            if (config.constellation.size() != 4) return blank;
            sc.criterion = SeCriterion::kSer;
            return solve_ser_fixed_point(sc);
    }
    return blank;
}

SweepResult monte_carlo_sweep(const ExperimentConfig& cfg,
                              const std::atomic<bool>* interrupt) {
    const bool block = cfg.kind == ExperimentConfig::Kind::kBlockSweep;
    if (!block && cfg.kind != ExperimentConfig::Kind::kFlatSweep)
        throw std::invalid_argument("monte_carlo_sweep: config kind is not a sweep");
    if (cfg.criterion == ExperimentConfig::Crit::kSer && cfg.constellation.size() != 4 &&
        cfg.precoder == ExperimentConfig::Precoder::kGamp)
        throw std::invalid_argument("SER criterion is restricted to QPSK");

    Shaper shaper = block ? Shaper::build(cfg.shaper_kind, cfg.block_len, cfg.roll_off)
                          : Shaper::build(Shaper::Kind::kOfdmCp, 4);
    const int workers = resolve_workers(cfg.workers);
    const RngStream root(cfg.seed);
    const double bits_per_sym = std::log2(static_cast<double>(
        shaper.real_symbols() && block ? cfg.constellation.order()
                                       : cfg.constellation.size()));

    SweepResult result;
    for (size_t pi = 0; pi < cfg.snr_db.size(); ++pi) {
        if (interrupt && interrupt->load()) {
            result.interrupted = true;
            break;
        }
        auto t0 = Clock::now();
        const double snr = std::pow(10.0, cfg.snr_db[pi] / 10.0);
        const double sigma2 = 1.0 / snr;

        std::vector<TrialCounts> slots;
        long total_channels = 0;
        TrialCounts merged;
        while (true) {
            long target = (total_channels == 0)
                              ? cfg.channels
                              : std::min<long>(total_channels * 2,
                                               static_cast<long>(cfg.channels) *
                                                   cfg.max_extend_factor);
            int n_new = static_cast<int>(target - total_channels);
            if (n_new <= 0) break;
            size_t start = slots.size();
            slots.resize(start + static_cast<size_t>(n_new));
            parallel_for(n_new, workers, [&](int j) {
                RngStream trial_root =
                    root.substream(pi, static_cast<std::uint64_t>(start) + j);
                slots[start + static_cast<size_t>(j)] =
                    block ? block_trial(cfg, shaper, sigma2, trial_root)
                          : flat_trial(cfg, sigma2, trial_root);
            });
            total_channels = static_cast<long>(slots.size());
            merged = TrialCounts{};
            for (const auto& s : slots) merged += s;
            if (merged.sym_err >= cfg.min_error_count) break;
            if (interrupt && interrupt->load()) break;
        }

        SweepPoint pt;
        pt.snr_db = cfg.snr_db[pi];
        pt.ebn0_db = cfg.snr_db[pi] - 10.0 * std::log10(bits_per_sym);
        pt.symbol_errors = merged.sym_err;
        pt.bit_errors = merged.bit_err;
        pt.symbols = merged.symbols;
        pt.bits_counted = merged.bits;
        pt.ser = merged.symbols > 0 ? static_cast<double>(merged.sym_err) / merged.symbols
                                    : kNaN;
        pt.ber = merged.bits > 0 ? static_cast<double>(merged.bit_err) / merged.bits : kNaN;
        pt.mse = merged.symbols > 0 ? merged.mse_acc / merged.symbols : kNaN;
        pt.mean_iterations =
            merged.gamp_runs > 0 ? static_cast<double>(merged.iters) / merged.gamp_runs : 0.0;
        pt.reliable = merged.sym_err >= cfg.min_error_count;

        SePoint se = se_companion(cfg, snr);
        pt.ser_se = se.ser;
        pt.ber_se = se.ber;

        pt.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        result.points.push_back(pt);
    }
    return result;
}

SpectrumResult ota_psd(const ExperimentConfig& cfg, const std::atomic<bool>* interrupt) {
    Shaper shaper = Shaper::build(cfg.shaper_kind, cfg.block_len, cfg.roll_off);
    const int workers = resolve_workers(cfg.workers);
    const RngStream root(cfg.seed);
    const int m = cfg.block_len;
    const int seg = m / 4;
    const double sigma2 = cfg.snr_db.empty() ? 0.1 : std::pow(10.0, -cfg.snr_db[0] / 10.0);

    std::vector<PsdAccumulator> acc(static_cast<size_t>(cfg.channels));
    std::vector<double> power(static_cast<size_t>(cfg.channels), 0.0);
    std::vector<long> samples(static_cast<size_t>(cfg.channels), 0);

    parallel_for(cfg.channels, workers, [&](int c) {
        if (interrupt && interrupt->load()) return;
        RngStream trial_root = root.substream(0, static_cast<std::uint64_t>(c));
        RngStream h_stream = trial_root.substream(0);
        WidebandChannel ch = draw_block_channel(cfg, h_stream);
        for (int v = 0; v < cfg.vectors_per_channel; ++v) {
            RngStream vec_stream = trial_root.substream(static_cast<std::uint64_t>(v) + 1);
            Eigen::MatrixXi indices;
            CMat data = draw_block_data(cfg, shaper, vec_stream, indices);
            BlockRun run = run_block_precoder(cfg, ch, shaper, data, sigma2);
            CMat y = block_forward(run.x_time, ch, 1.0); // noiseless, at the users
            for (int k = 0; k < cfg.users; ++k) {
                CVec time = centered_idft(CVec(y.row(k).transpose()));
                acc[static_cast<size_t>(c)].add(welch_psd(time, seg));
                power[static_cast<size_t>(c)] += time.squaredNorm() / m;
                samples[static_cast<size_t>(c)] += 1;
            }
        }
    });

    SpectrumResult res;
    PsdAccumulator total;
    double mean_power = 0.0;
    long n = 0;
    for (int c = 0; c < cfg.channels; ++c) {
        if (acc[static_cast<size_t>(c)].count == 0) continue;
        total.add(acc[static_cast<size_t>(c)].mean());
        mean_power += power[static_cast<size_t>(c)];
        n += samples[static_cast<size_t>(c)];
    }
    if (total.count == 0) throw std::runtime_error("ota_psd: no blocks simulated");
    res.psd = total.mean();
    res.mean_power = mean_power / static_cast<double>(n);
    res.freq.resize(seg);
    for (int i = 0; i < seg; ++i) res.freq(i) = static_cast<double>(i - seg / 2) / seg;
    res.aclr_db = aclr_dbc(res.psd);
    BandPower bp = band_power_split(res.psd);
    res.in_band = bp.in_band;
    res.out_of_band = bp.out_of_band;
    res.parseval_rel_err = std::fabs(res.psd.sum() - res.mean_power) /
                           std::max(res.mean_power, 1e-300);
    res.interrupted = interrupt && interrupt->load();
    return res;
}

SpectrumResult trp_psd(const ExperimentConfig& cfg, const CouplingMatrix& coupling,
                       const std::atomic<bool>* interrupt) {
    if (coupling.side * coupling.side != cfg.antennas)
        throw std::invalid_argument("trp_psd: coupling matrix does not match antenna count");
    Shaper shaper = Shaper::build(cfg.shaper_kind, cfg.block_len, cfg.roll_off);
    const int workers = resolve_workers(cfg.workers);
    const RngStream root(cfg.seed);
    const int m = cfg.block_len;
    const double sigma2 = cfg.snr_db.empty() ? 0.1 : std::pow(10.0, -cfg.snr_db[0] / 10.0);
    const CMat bc = coupling.b.cast<cplx>();

    std::vector<RVec> per_channel(static_cast<size_t>(cfg.channels));
    std::vector<long> blocks(static_cast<size_t>(cfg.channels), 0);

    parallel_for(cfg.channels, workers, [&](int c) {
        if (interrupt && interrupt->load()) return;
        RngStream trial_root = root.substream(0, static_cast<std::uint64_t>(c));
        RngStream h_stream = trial_root.substream(0);
        WidebandChannel ch = draw_block_channel(cfg, h_stream);
        RVec trp = RVec::Zero(m);
        long nb = 0;
        for (int v = 0; v < cfg.vectors_per_channel; ++v) {
            RngStream vec_stream = trial_root.substream(static_cast<std::uint64_t>(v) + 1);
            Eigen::MatrixXi indices;
            CMat data = draw_block_data(cfg, shaper, vec_stream, indices);
            BlockRun run = run_block_precoder(cfg, ch, shaper, data, sigma2);
            CMat xhat = centered_dft_rows(run.x_time); // N x M, per-tone stacks
            for (int i = 0; i < m; ++i) {
                cplx q = xhat.col(i).adjoint() * (bc * xhat.col(i));
                trp(i) += q.real();
            }
            ++nb;
        }
        per_channel[static_cast<size_t>(c)] = trp;
        blocks[static_cast<size_t>(c)] = nb;
    });

    SpectrumResult res;
    RVec total = RVec::Zero(m);
    long nb = 0;
    for (int c = 0; c < cfg.channels; ++c) {
        if (blocks[static_cast<size_t>(c)] == 0) continue;
        total += per_channel[static_cast<size_t>(c)];
        nb += blocks[static_cast<size_t>(c)];
    }
    if (nb == 0) throw std::runtime_error("trp_psd: no blocks simulated");
    res.psd = total / static_cast<double>(nb);
    res.freq.resize(m);
    for (int i = 0; i < m; ++i) res.freq(i) = static_cast<double>(i - m / 2) / m;
    BandPower bp = band_power_split(res.psd);
    res.in_band = bp.in_band;
    res.out_of_band = bp.out_of_band;
    res.mean_power = res.psd.sum();
    res.aclr_db = 10.0 * std::log10(bp.out_of_band / bp.in_band);
    res.interrupted = interrupt && interrupt->load();
    return res;
}

SpectrumResult trp_psd(const ExperimentConfig& cfg, const std::atomic<bool>* interrupt) {
    CouplingMatrix cm = coupling_matrix_upa(cfg.array_side, cfg.spacing_over_lambda);
    return trp_psd(cfg, cm, interrupt);
}

SevoCurve sevo_curve(const ExperimentConfig& cfg) {
    SevoCurve curve;
    curve.snr_db = cfg.snr_db;
    curve.bits = cfg.bits_list;
    double ratio = cfg.ratio > 0.0 ? cfg.ratio
                                   : static_cast<double>(cfg.users) / cfg.antennas;
    const int np = static_cast<int>(cfg.snr_db.size());
    const int nb = static_cast<int>(cfg.bits_list.size());
    curve.capacity.resize(np, nb);
    curve.theta_opt.resize(np, nb);
    for (int i = 0; i < np; ++i) {
        double snr = std::pow(10.0, cfg.snr_db[static_cast<size_t>(i)] / 10.0);
        for (int j = 0; j < nb; ++j) {
            SinrOpt opt = sinr_opt(coeff_a(cfg.bits_list[static_cast<size_t>(j)], 1.0 / ratio),
                                   snr);
            curve.capacity(i, j) = opt.capacity;
            curve.theta_opt(i, j) = opt.theta_opt;
        }
    }
    return curve;
}

} // namespace precode
