#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "precode/io.hpp"

using namespace precode;
using nlohmann::json;

namespace {

std::atomic<bool> g_interrupt{false};

void on_sigint(int) { g_interrupt.store(true); }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommonOpts {
    std::string config_path;
    std::string out_base;
    bool svg = false;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, const std::string& default_out) {
    opts.out_base = default_out;
    cmd->add_option("-c,--config", opts.config_path, "JSON experiment config")->required();
    cmd->add_option("-o,--out", opts.out_base, "output basename (<out>.csv, <out>.meta.json)");
    cmd->add_flag("--svg", opts.svg, "also emit <out>.svg line chart");
    cmd->add_option("--workers", opts.workers, "worker threads (default: PRECODE_WORKERS or all cores)");
}

double nan_to(double v, double sub) { return std::isfinite(v) ? v : sub; }

int run_sweep(const CommonOpts& opts, ExperimentConfig::Kind kind) {
    ExperimentConfig cfg = parse_experiment_config(slurp(opts.config_path), kind);
    if (opts.workers > 0) cfg.workers = opts.workers;
    auto t0 = std::chrono::steady_clock::now();
    SweepResult res = monte_carlo_sweep(cfg, &g_interrupt);
    double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<std::string> header = {"snr_db",  "ebn0_db", "ser_mc",   "ber_mc",
                                       "mse_mc",  "ser_se",  "ber_se",   "symbol_errors",
                                       "bit_errors", "symbols", "mean_iters", "reliable"};
    std::vector<std::vector<double>> rows;
    json per_point = json::array();
    for (const auto& p : res.points) {
        rows.push_back({p.snr_db, p.ebn0_db, p.ser, p.ber, p.mse, p.ser_se, p.ber_se,
                        static_cast<double>(p.symbol_errors),
                        static_cast<double>(p.bit_errors), static_cast<double>(p.symbols),
                        p.mean_iterations, p.reliable ? 1.0 : 0.0});
        per_point.push_back({{"snr_db", p.snr_db},
                             {"symbol_errors", p.symbol_errors},
                             {"bit_errors", p.bit_errors},
                             {"symbols", p.symbols},
                             {"wall_seconds", p.wall_seconds},
                             {"reliable", p.reliable}});
        if (!p.reliable)
            std::cerr << "note: snr " << p.snr_db << " dB has only " << p.symbol_errors
                      << " symbol errors; rate flagged unreliable\n";
    }
    write_csv(opts.out_base + ".csv", header, rows);
    json extra;
    extra["points"] = per_point;
    extra["interrupted"] = res.interrupted;
    write_meta(opts.out_base + ".meta.json", cfg, runtime, extra.dump());

    if (opts.svg) {
        SvgSeries mc{"ber_mc", {}, {}}, se{"ber_se", {}, {}};
        for (const auto& p : res.points) {
            double ber = std::isfinite(p.ber) ? p.ber : p.ser;
            double ber_a = std::isfinite(p.ber_se) ? p.ber_se : p.ser_se;
            if (ber > 0) { mc.x.push_back(p.snr_db); mc.y.push_back(ber); }
            if (ber_a > 0) { se.x.push_back(p.snr_db); se.y.push_back(ber_a); }
        }
        write_svg_chart(opts.out_base + ".svg", "error-rate waterfall", "SNR [dB]",
                        "error rate", {mc, se}, true);
    }
    std::cout << opts.out_base << ".csv written (" << res.points.size() << " points"
              << (res.interrupted ? ", interrupted" : "") << ")\n";
    return 0;
}

int run_sevo(const CommonOpts& opts) {
    ExperimentConfig cfg =
        parse_experiment_config(slurp(opts.config_path), ExperimentConfig::Kind::kSevoCurve);
    auto t0 = std::chrono::steady_clock::now();
    SevoCurve curve = sevo_curve(cfg);
    double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<std::string> header = {"snr_db"};
    for (int b : curve.bits)
        header.push_back(b > 0 ? "capacity_b" + std::to_string(b) : "capacity_binf");
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < curve.snr_db.size(); ++i) {
        std::vector<double> row = {curve.snr_db[i]};
        for (size_t jb = 0; jb < curve.bits.size(); ++jb)
            row.push_back(curve.capacity(static_cast<int>(i), static_cast<int>(jb)));
        rows.push_back(row);
    }
    write_csv(opts.out_base + ".csv", header, rows);
    write_meta(opts.out_base + ".meta.json", cfg, runtime, "");

    if (opts.svg) {
        std::vector<SvgSeries> series;
        for (size_t jb = 0; jb < curve.bits.size(); ++jb) {
            SvgSeries s{header[jb + 1], {}, {}};
            for (size_t i = 0; i < curve.snr_db.size(); ++i) {
                s.x.push_back(curve.snr_db[i]);
                s.y.push_back(curve.capacity(static_cast<int>(i), static_cast<int>(jb)));
            }
            series.push_back(std::move(s));
        }
        write_svg_chart(opts.out_base + ".svg", "achievable rate", "SNR [dB]",
                        "bits/channel use", series, false);
    }
    std::cout << opts.out_base << ".csv written\n";
    return 0;
}

int run_spectrum(const CommonOpts& opts, bool trp) {
    ExperimentConfig cfg = parse_experiment_config(
        slurp(opts.config_path),
        trp ? ExperimentConfig::Kind::kTrpSpectrum : ExperimentConfig::Kind::kOtaSpectrum);
    if (opts.workers > 0) cfg.workers = opts.workers;
    if (trp && cfg.channel_model == ExperimentConfig::ChannelModel::kRayWideband)
        throw std::invalid_argument(
            "trp-spectrum: use iid-flat or planar-ray channels (ULA rays do not share "
            "the planar-array geometry)");
    auto t0 = std::chrono::steady_clock::now();
    SpectrumResult res = trp ? trp_psd(cfg, &g_interrupt) : ota_psd(cfg, &g_interrupt);
    double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<std::string> header = {"freq", trp ? "trp_db" : "psd_db"};
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < res.freq.size(); ++i)
        rows.push_back({res.freq(i), 10.0 * std::log10(std::max(res.psd(i), 1e-300))});
    write_csv(opts.out_base + ".csv", header, rows);

    json extra;
    extra["in_band_power"] = res.in_band;
    extra["out_of_band_power"] = res.out_of_band;
    extra["oob_over_inband_db"] = 10.0 * std::log10(res.out_of_band / res.in_band);
    if (!trp) {
        extra["aclr_dbc"] = res.aclr_db;
        extra["parseval_rel_err"] = res.parseval_rel_err;
    }
    extra["interrupted"] = res.interrupted;
    write_meta(opts.out_base + ".meta.json", cfg, runtime, extra.dump());

    if (opts.svg) {
        SvgSeries s{trp ? "trp" : "psd", {}, {}};
        for (int i = 0; i < res.freq.size(); ++i) {
            s.x.push_back(res.freq(i));
            s.y.push_back(nan_to(10.0 * std::log10(std::max(res.psd(i), 1e-300)), -300.0));
        }
        write_svg_chart(opts.out_base + ".svg", trp ? "total radiated power" : "OTA spectrum",
                        "freq [cycles/sample]", "power [dB]", {s}, false);
    }
    if (!trp)
        std::cout << "ACLR = " << res.aclr_db << " dBc\n";
    else
        std::cout << "OOB/in-band = " << 10.0 * std::log10(res.out_of_band / res.in_band)
                  << " dB\n";
    std::cout << opts.out_base << ".csv written"
              << (res.interrupted ? " (interrupted)" : "") << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_sigint);

    CLI::App app{"GAMP precoding and OTA spectral shaping simulator"};
    app.require_subcommand(1);

    CommonOpts flat_opts, block_opts, sevo_opts, ota_opts, trp_opts;
    CLI::App* flat = app.add_subcommand("flat-sweep", "Monte Carlo error rates, flat channel");
    add_common(flat, flat_opts, "flat_sweep");
    CLI::App* blk = app.add_subcommand("block-sweep", "Monte Carlo error rates, block processing");
    add_common(blk, block_opts, "block_sweep");
    CLI::App* sevo = app.add_subcommand("sevo-curve", "analytic achievable-rate curves");
    add_common(sevo, sevo_opts, "sevo_curve");
    CLI::App* ota = app.add_subcommand("ota-spectrum", "received-signal PSD and ACLR");
    add_common(ota, ota_opts, "ota_spectrum");
    CLI::App* trp = app.add_subcommand("trp-spectrum", "total radiated power spectral density");
    add_common(trp, trp_opts, "trp_spectrum");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (flat->parsed()) return run_sweep(flat_opts, ExperimentConfig::Kind::kFlatSweep);
        if (blk->parsed()) return run_sweep(block_opts, ExperimentConfig::Kind::kBlockSweep);
        if (sevo->parsed()) return run_sevo(sevo_opts);
        if (ota->parsed()) return run_spectrum(ota_opts, false);
        if (trp->parsed()) return run_spectrum(trp_opts, true);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
