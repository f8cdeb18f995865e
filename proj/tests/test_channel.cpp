#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "precode/bessel.hpp"
#include "precode/channel.hpp"
#include "precode/coupling.hpp"
#include "precode/rng.hpp"

using namespace precode;

namespace {

// 40-term power series oracle, written independently of the implementation
double j1_series_oracle(double x) {
    long double sum = 0.0L;
    long double fact_k = 1.0L, fact_k1 = 1.0L;
    for (int k = 0; k <= 40; ++k) {
        if (k > 0) {
            fact_k *= k;
            fact_k1 *= (k + 1);
        } else {
            fact_k1 = 1.0L;
        }
        long double term = std::pow(0.5L * static_cast<long double>(x), 2 * k + 1) /
                           (fact_k * fact_k1);
        sum += (k % 2 == 0) ? term : -term;
    }
    return static_cast<double>(sum);
}

} // namespace

TEST_CASE("bessel_j1 against the series oracle") {
    CHECK(bessel_j1(0.0) == 0.0);
    CHECK(bessel_j1(1e-8) == doctest::Approx(0.5e-8).epsilon(1e-9));
    CHECK(std::fabs(bessel_j1(1.0) - j1_series_oracle(1.0)) < 1e-10);
    for (double x : {0.3, 2.0, 4.7, 6.9}) CHECK(bessel_j1(x) == doctest::Approx(j1_series_oracle(x)).epsilon(1e-12));
    // asymptotic branch vs the standard library special function
    for (double x : {8.5, 12.0, 20.0, 40.0})
        CHECK(std::fabs(bessel_j1(x) - std::cyl_bessel_j(1.0, x)) < 1e-8);
}

TEST_CASE("draw_iid_flat statistics and determinism") {
    RngStream rng(7);
    FlatChannel ch = draw_iid_flat(100, 128, rng);
    double mean_sq = ch.h.cwiseAbs2().mean();
    CHECK(mean_sq == doctest::Approx(1.0 / 128).epsilon(0.05));

    RngStream a(99), b(99);
    FlatChannel c1 = draw_iid_flat(20, 40, a);
    FlatChannel c2 = draw_iid_flat(20, 40, b);
    CHECK((c1.h - c2.h).norm() == 0.0);

    double acc = 0.0;
    for (int t = 0; t < 4000; ++t) {
        RngStream s = RngStream(3).substream(t);
        acc += std::norm(draw_iid_flat(1, 1, s).h(0, 0));
    }
    CHECK(acc / 4000 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("ula_response") {
    const int n = 16, m = 64;
    const double ts = 1.0 / 7e9, fc = 60.5e9;

    CVec broadside = ula_response(5, kPi / 2, n, m, ts, fc);
    for (int i = 0; i < n; ++i) CHECK(std::abs(broadside(i) - cplx{1.0, 0.0}) < 1e-12);

    CVec endfire = ula_response(0, 0.0, n, m, ts, fc);
    for (int i = 0; i < n; ++i)
        CHECK(std::abs(endfire(i) - std::polar(1.0, -kPi * i)) < 1e-12);

    // independent per-entry evaluation at m = M/4
    double phi = kPi / 3;
    CVec a = ula_response(m / 4, phi, n, m, ts, fc);
    for (int i = 0; i < n; ++i) {
        double phase = -kPi * std::cos(phi) * i * ((m / 4) / (m * ts * fc) + 1.0);
        CHECK(std::abs(a(i) - cplx{std::cos(phase), std::sin(phase)}) < 1e-12);
        CHECK(std::abs(std::abs(a(i)) - 1.0) < 1e-14);
    }

    CHECK_THROWS_AS(ula_response(m / 2, 0.1, n, m, ts, fc), std::invalid_argument);
}

TEST_CASE("draw_ray_channel") {
    const int n = 8, m = 32;
    const double ts = 1.0 / 7e9, fc = 60.5e9;

    // single undelayed unit path: rows equal the array response
    RayParams p;
    p.per_user.push_back({Ray{cplx{1.0, 0.0}, 0.7, 0.0}});
    WidebandChannel ch = draw_ray_channel(p, n, m, ts, fc);
    for (int tone = -m / 2; tone < m / 2; ++tone) {
        CVec a = ula_response(tone, 0.7, n, m, ts, fc);
        CHECK((ch.tone(tone).row(0).transpose() - a).norm() < 1e-12);
    }

    // pure delay rotation at tone M/2-1
    RayParams pd;
    pd.per_user.push_back({Ray{cplx{1.0, 0.0}, kPi / 2, ts}});
    WidebandChannel chd = draw_ray_channel(pd, 1, m, ts, fc);
    int tone = m / 2 - 1;
    cplx expected = std::polar(1.0, -2.0 * kPi * tone / m);
    CHECK(std::abs(chd.tone(tone)(0, 0) - expected) < 1e-12);

    // linear in the gains
    RngStream rng(13);
    RayParams pr = draw_ray_params(2, 4, 50.0, ts, rng);
    RayParams pr2 = pr;
    for (auto& user : pr2.per_user)
        for (auto& ray : user) ray.gain *= cplx{2.0, -1.0};
    WidebandChannel w1 = draw_ray_channel(pr, n, m, ts, fc);
    WidebandChannel w2 = draw_ray_channel(pr2, n, m, ts, fc);
    for (int i = 0; i < m; ++i)
        CHECK((w2.per_tone[i] - cplx{2.0, -1.0} * w1.per_tone[i]).norm() < 1e-10);

    // paper-style draw: E ||h_k[m]||^2 ~ N
    double acc = 0.0;
    int cnt = 0;
    for (int trial = 0; trial < 60; ++trial) {
        RngStream s = RngStream(29).substream(trial);
        RayParams rp = draw_ray_params(1, 10, 50.0, ts, s);
        WidebandChannel wc = draw_ray_channel(rp, n, m, ts, fc);
        for (int i = 0; i < m; i += 8) {
            acc += wc.per_tone[i].row(0).squaredNorm();
            ++cnt;
        }
    }
    CHECK(acc / cnt == doctest::Approx(static_cast<double>(n)).epsilon(0.15));
}

TEST_CASE("coupling matrix of the planar array") {
    CouplingMatrix cm = coupling_matrix_upa(4, 0.5, 1.0);
    const int n = 16;
    REQUIRE(cm.b.rows() == n);
    CHECK((cm.b - cm.b.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    for (int i = 0; i < n; ++i) CHECK(cm.b(i, i) == doctest::Approx(kPi / 4));

    // nearest-neighbor entry at quarter-wavelength spacing
    CouplingMatrix cq = coupling_matrix_upa(4, 0.25, 1.0);
    for (int i = 0; i < n; ++i) CHECK(cq.b(i, i) == doctest::Approx(kPi / 16));
    CHECK(cq.b(0, 1) == doctest::Approx(0.25 * j1_series_oracle(kPi / 2)));

    // positive semidefinite up to roundoff
    for (double sp : {0.5, 0.25}) {
        CouplingMatrix c = coupling_matrix_upa(8, sp, 1.0);
        Eigen::SelfAdjointEigenSolver<RMat> es(c.b);
        double lmax = es.eigenvalues().maxCoeff();
        CHECK(es.eigenvalues().minCoeff() >= -1e-8 * lmax);
    }

    // spatial oversampling shrinks the propagating subspace: fewer
    // eigenvalues above half the maximum at lambda/4 than at lambda/2
    auto frac_above = [](const CouplingMatrix& c) {
        Eigen::SelfAdjointEigenSolver<RMat> es(c.b);
        double half = 0.5 * es.eigenvalues().maxCoeff();
        int cnt = 0;
        for (int i = 0; i < es.eigenvalues().size(); ++i)
            if (es.eigenvalues()(i) > half) ++cnt;
        return static_cast<double>(cnt) / es.eigenvalues().size();
    };
    CHECK(frac_above(coupling_matrix_upa(8, 0.25, 1.0)) <
          frac_above(coupling_matrix_upa(8, 0.5, 1.0)));
}

TEST_CASE("channel JSON fixtures round-trip") {
    RngStream rng(3);
    FlatChannel flat = draw_iid_flat(3, 5, rng);
    FlatChannel flat2 = flat_channel_from_json(channel_to_json(flat));
    CHECK((flat.h - flat2.h).norm() == 0.0);

    WidebandChannel wb = block_fading_from_flat(flat, 8);
    wb.sample_interval = 1.0 / 7e9;
    wb.carrier_hz = 60.5e9;
    WidebandChannel wb2 = channel_from_json(channel_to_json(wb));
    REQUIRE(wb2.dft_length() == 8);
    CHECK(wb2.sample_interval == wb.sample_interval);
    for (int i = 0; i < 8; ++i) CHECK((wb.per_tone[i] - wb2.per_tone[i]).norm() == 0.0);
}

TEST_CASE("planar ray channel lives on the grid") {
    RngStream rng(77);
    FlatChannel ch = draw_planar_ray_flat(6, 8, 0.25, 8, rng);
    CHECK(ch.users() == 6);
    CHECK(ch.antennas() == 64);
    double mean_sq = ch.h.cwiseAbs2().mean();
    CHECK(mean_sq == doctest::Approx(1.0 / 64).epsilon(0.5)); // loose, few paths
}
