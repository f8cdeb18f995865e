#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "precode/fft.hpp"
#include "precode/harness.hpp"
#include "precode/io.hpp"
#include "precode/rng.hpp"

using namespace precode;

TEST_CASE("welch psd: exact power accounting and tone concentration") {
    RngStream rng(3);
    const int m = 256;
    CVec x(m);
    for (int i = 0; i < m; ++i) x(i) = rng.next_cnormal();
    RVec psd = welch_psd(x, m / 4);
    double power = x.squaredNorm() / m;
    CHECK(std::fabs(psd.sum() - power) <= 1e-9 * power);

    // single complex exponential lands in its bin neighborhood
    const double f0 = 10.0 / 64.0; // bin 10 of 64
    for (int i = 0; i < m; ++i) x(i) = std::polar(1.0, 2 * kPi * f0 * i);
    psd = welch_psd(x, 64);
    int peak;
    psd.maxCoeff(&peak);
    CHECK(peak == 10 + 32);
    CHECK(psd(peak) / psd.sum() > 0.8);

    CHECK_THROWS_AS(welch_psd(x, 3), std::invalid_argument);
}

TEST_CASE("band power split and aclr") {
    RVec psd = RVec::Zero(64);
    for (int i = 0; i < 64; ++i) {
        double f = (i - 32) / 64.0;
        psd(i) = std::fabs(f) < 0.25 ? 1.0 : 0.01;
    }
    BandPower bp = band_power_split(psd);
    CHECK(bp.in_band == doctest::Approx(31.0));
    CHECK(bp.out_of_band == doctest::Approx(0.33));
    CHECK(aclr_dbc(psd) == doctest::Approx(10 * std::log10(0.33 / 31.0)));
}

TEST_CASE("quantized ZF baseline") {
    PhaseAlphabet b2(2);
    FlatChannel ch;
    ch.h = CMat::Identity(1, 1);
    CVec d(1);
    d(0) = std::polar(1.0, kPi / 4); // on an alphabet ray
    auto regions = ace_regions_of(CVec::Constant(1, cplx{1.0, 1.0}), Constellation::qpsk(), true);
    ZfResult zf = quantized_zf_precoder(ch, d, b2, regions, 0.01);
    CHECK(std::abs(zf.x(0) - std::polar(1.0, kPi / 4)) < 1e-12);

    // near-continuous DAC: beta H x approximately reproduces the data
    RngStream rng(5);
    PhaseAlphabet b8(8);
    FlatChannel big = draw_iid_flat(4, 64, rng);
    Constellation qpsk = Constellation::qpsk();
    CVec data(4);
    for (int k = 0; k < 4; ++k) data(k) = qpsk.point(static_cast<int>(rng.next_below(4)));
    auto reg = ace_regions_of(data, qpsk, false);
    ZfResult res = quantized_zf_precoder(big, data, b8, reg, 1e-6);
    CVec received = res.beta * (big.h * res.x);
    CHECK((received - data).norm() / data.norm() < 0.2); // quantization floor only
    for (int n = 0; n < 64; ++n)
        CHECK(std::fabs(std::abs(res.x(n)) - 1.0) < 1e-12);
}

TEST_CASE("monte_carlo_sweep: deterministic and worker-count independent") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentConfig::Kind::kFlatSweep;
    cfg.antennas = 8;
    cfg.users = 2;
    cfg.bits = 2;
    cfg.constellation = Constellation::qpsk();
    cfg.criterion = ExperimentConfig::Crit::kMseAce;
    cfg.snr_db = {0.0, 6.0};
    cfg.channels = 25;
    cfg.vectors_per_channel = 2;
    cfg.seed = 99;
    cfg.min_error_count = 1;
    cfg.max_extend_factor = 1;

    cfg.workers = 1;
    SweepResult a = monte_carlo_sweep(cfg);
    cfg.workers = 2;
    SweepResult b = monte_carlo_sweep(cfg);
    REQUIRE(a.points.size() == b.points.size());
    for (size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].symbol_errors == b.points[i].symbol_errors);
        CHECK(a.points[i].bit_errors == b.points[i].bit_errors);
        CHECK(a.points[i].symbols == b.points[i].symbols);
        CHECK(a.points[i].mse == b.points[i].mse);
    }
}

TEST_CASE("flat sweep: interference-free regime decodes cleanly") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentConfig::Kind::kFlatSweep;
    cfg.antennas = 24;
    cfg.users = 3;
    cfg.bits = 3;
    cfg.constellation = Constellation::qpsk();
    cfg.criterion = ExperimentConfig::Crit::kMseAce;
    cfg.snr_db = {20.0};
    cfg.channels = 10;
    cfg.vectors_per_channel = 2;
    cfg.seed = 7;
    cfg.min_error_count = 100;
    cfg.max_extend_factor = 2; // extends once, stays clean
    SweepResult res = monte_carlo_sweep(cfg);
    REQUIRE(res.points.size() == 1);
    CHECK(res.points[0].symbol_errors == 0);
    CHECK_FALSE(res.points[0].reliable); // flagged: too few errors to trust
    CHECK(res.points[0].ser == 0.0);
    CHECK(std::isfinite(res.points[0].ser_se));
}

TEST_CASE("ser criterion sweep runs and reports the SE companion") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentConfig::Kind::kFlatSweep;
    cfg.antennas = 10;
    cfg.users = 5;
    cfg.bits = 2;
    cfg.constellation = Constellation::qpsk();
    cfg.criterion = ExperimentConfig::Crit::kSer;
    cfg.snr_db = {2.0};
    cfg.channels = 20;
    cfg.vectors_per_channel = 1;
    cfg.seed = 3;
    cfg.min_error_count = 10;
    cfg.max_extend_factor = 1;
    SweepResult res = monte_carlo_sweep(cfg);
    REQUIRE(res.points.size() == 1);
    CHECK(res.points[0].ber > 0.0);
    CHECK(res.points[0].ber_se > 0.0);
    CHECK(res.points[0].ber_se < 0.5);
}

TEST_CASE("block sweep: high-SNR OFDM decodes cleanly") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentConfig::Kind::kBlockSweep;
    cfg.antennas = 12;
    cfg.users = 2;
    cfg.bits = 3;
    cfg.block_len = 16;
    cfg.constellation = Constellation::qpsk();
    cfg.criterion = ExperimentConfig::Crit::kMseAce;
    cfg.shaper_kind = Shaper::Kind::kOfdmCp;
    cfg.channel_model = ExperimentConfig::ChannelModel::kIidFlat;
    cfg.snr_db = {25.0};
    cfg.channels = 6;
    cfg.vectors_per_channel = 1;
    cfg.seed = 11;
    cfg.min_error_count = 1;
    cfg.max_extend_factor = 1;
    SweepResult res = monte_carlo_sweep(cfg);
    REQUIRE(res.points.size() == 1);
    CHECK(res.points[0].symbol_errors == 0);
}

TEST_CASE("ota psd of the ideal precoder: flat in-band, >= 40 dB down out of band") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentConfig::Kind::kOtaSpectrum;
    cfg.antennas = 16;
    cfg.users = 4;
    cfg.bits = 2;
    cfg.block_len = 64;
    cfg.constellation = Constellation::qam(4);
    cfg.precoder = ExperimentConfig::Precoder::kIdeal;
    cfg.shaper_kind = Shaper::Kind::kOfdmCp;
    cfg.channel_model = ExperimentConfig::ChannelModel::kIidFlat;
    cfg.snr_db = {10.0};
    cfg.channels = 4;
    cfg.vectors_per_channel = 3;
    cfg.seed = 21;
    SpectrumResult res = ota_psd(cfg);
    CHECK(res.parseval_rel_err < 1e-6);
    CHECK(res.aclr_db <= -40.0);

    // in-band flatness away from the brick edges
    const int l = static_cast<int>(res.psd.size());
    double pmin = 1e300, pmax = 0.0;
    for (int i = 0; i < l; ++i) {
        double f = static_cast<double>(i - l / 2) / l;
        if (std::fabs(f) < 0.20) {
            pmin = std::min(pmin, res.psd(i));
            pmax = std::max(pmax, res.psd(i));
        }
    }
    CHECK(10 * std::log10(pmax / pmin) < 1.5);
}

TEST_CASE("trp psd: single antenna reduces to the scaled per-tone power") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentConfig::Kind::kTrpSpectrum;
    cfg.antennas = 1;
    cfg.users = 1;
    cfg.bits = 2;
    cfg.block_len = 16;
    cfg.constellation = Constellation::qpsk();
    cfg.shaper_kind = Shaper::Kind::kOfdmCp;
    cfg.channel_model = ExperimentConfig::ChannelModel::kPlanarRay;
    cfg.array_side = 1;
    cfg.spacing_over_lambda = 0.25;
    cfg.num_paths = 1;
    cfg.snr_db = {10.0};
    cfg.channels = 2;
    cfg.vectors_per_channel = 2;
    cfg.seed = 31;
    SpectrumResult res = trp_psd(cfg);
    // constant-envelope entries: sum over tones of |X|^2 equals M exactly,
    // and B = pi (a/lambda)^2 for a single element
    double expected_total = kPi * 0.0625 * cfg.block_len;
    CHECK(res.psd.sum() == doctest::Approx(expected_total).epsilon(1e-10));
}

TEST_CASE("config json round trip and diagnostics") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentConfig::Kind::kBlockSweep;
    cfg.antennas = 33;
    cfg.users = 7;
    cfg.bits = 3;
    cfg.block_len = 128;
    cfg.constellation = Constellation::qam(4);
    cfg.criterion = ExperimentConfig::Crit::kMseNoAce;
    cfg.precoder = ExperimentConfig::Precoder::kZf;
    cfg.snr_db = {1.0, 2.5};
    cfg.seed = 12345;
    cfg.gamp.mu = 0.7;
    cfg.gamp.ser_mode = SerMode::kTaylor;
    cfg.shaper_kind = Shaper::Kind::kCpSc;
    cfg.roll_off = 0.3;

    ExperimentConfig back =
        parse_experiment_config(config_to_json(cfg), ExperimentConfig::Kind::kBlockSweep);
    CHECK(back.antennas == 33);
    CHECK(back.users == 7);
    CHECK(back.constellation.size() == 16);
    CHECK(back.criterion == ExperimentConfig::Crit::kMseNoAce);
    CHECK(back.precoder == ExperimentConfig::Precoder::kZf);
    CHECK(back.gamp.mu == doctest::Approx(0.7));
    CHECK(back.gamp.ser_mode == SerMode::kTaylor);
    CHECK(back.shaper_kind == Shaper::Kind::kCpSc);
    CHECK(back.roll_off == doctest::Approx(0.3));

    CHECK_THROWS_AS(parse_experiment_config("{\"frobnicate\": 3}",
                                            ExperimentConfig::Kind::kFlatSweep),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_experiment_config("not json",
                                            ExperimentConfig::Kind::kFlatSweep),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_experiment_config("{\"bits\": 99}",
                                            ExperimentConfig::Kind::kFlatSweep),
                    std::invalid_argument);
    // snr grid object form
    ExperimentConfig grid = parse_experiment_config(
        "{\"snr_db\": {\"start\": 0, \"stop\": 4, \"step\": 2}}",
        ExperimentConfig::Kind::kFlatSweep);
    REQUIRE(grid.snr_db.size() == 3);
    CHECK(grid.snr_db[2] == doctest::Approx(4.0));
}

TEST_CASE("csv writer is byte-stable") {
    std::vector<std::string> header = {"a", "b"};
    std::vector<std::vector<double>> rows = {{1.0, 0.ере123456789012}, {-3.5e-9, 2e300}};
    // deliberately includes values with many digits
    rows[0][1] = 0.123456789012;
    write_csv("/tmp/precode_csv_a.csv", header, rows);
    write_csv("/tmp/precode_csv_b.csv", header, rows);
    FILE* fa = std::fopen("/tmp/precode_csv_a.csv", "rb");
    FILE* fb = std::fopen("/tmp/precode_csv_b.csv", "rb");
    REQUIRE(fa);
    REQUIRE(fb);
    char ba[4096], bb[4096];
    size_t na = std::fread(ba, 1, sizeof ba, fa);
    size_t nb = std::fread(bb, 1, sizeof bb, fb);
    std::fclose(fa);
    std::fclose(fb);
    REQUIRE(na == nb);
    CHECK(std::memcmp(ba, bb, na) == 0);
}

TEST_CASE("sevo curve evaluation") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentConfig::Kind::kSevoCurve;
    cfg.snr_db = {0.0, 10.0};
    cfg.bits_list = {1, 2, 3, 0};
    cfg.ratio = 0.2;
    SevoCurve curve = sevo_curve(cfg);
    REQUIRE(curve.capacity.rows() == 2);
    REQUIRE(curve.capacity.cols() == 4);
    // capacity increases with resolution at fixed snr
    for (int i = 0; i < 2; ++i)
        for (int j = 1; j < 4; ++j) CHECK(curve.capacity(i, j) >= curve.capacity(i, j - 1));
}
