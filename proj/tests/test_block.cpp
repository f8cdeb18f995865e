#include <doctest.h>

#include <cmath>

#include "precode/block.hpp"
#include "precode/fft.hpp"
#include "precode/precoders.hpp"
#include "precode/rng.hpp"

using namespace precode;

namespace {

CMat dense_block_operator(const WidebandChannel& ch, double beta) {
    const int n = ch.antennas(), k = ch.users(), m = ch.dft_length();
    // A = beta Diag(H[m]) (F_M (x) I_N), F centered unitary
    CMat f(m, m);
    for (int i = 0; i < m; ++i)
        for (int t = 0; t < m; ++t) {
            double ph = -2.0 * kPi * (i - m / 2) * t / m;
            f(i, t) = std::polar(1.0 / std::sqrt(double(m)), ph);
        }
    CMat a = CMat::Zero(m * k, m * n);
    for (int i = 0; i < m; ++i)
        for (int t = 0; t < m; ++t)
            a.block(i * k, t * n, k, n) = beta * f(i, t) * ch.per_tone[i];
    return a;
}

WidebandChannel random_channel(int users, int ants, int m, uint64_t seed) {
    RngStream rng(seed);
    WidebandChannel ch;
    ch.per_tone.resize(m);
    for (int i = 0; i < m; ++i) {
        CMat h(users, ants);
        for (int r = 0; r < users; ++r)
            for (int c = 0; c < ants; ++c) h(r, c) = rng.next_cnormal(1.0 / ants);
        ch.per_tone[i] = h;
    }
    return ch;
}

CMat random_qam_data(int users, int syms, int levels, RngStream& rng, Eigen::MatrixXi* idx) {
    Constellation cons = Constellation::qam(levels);
    CMat d(users, syms);
    if (idx) idx->resize(users, syms);
    for (int k = 0; k < users; ++k)
        for (int c = 0; c < syms; ++c) {
            int i = static_cast<int>(rng.next_below(cons.size()));
            if (idx) (*idx)(k, c) = i;
            d(k, c) = cons.point(i);
        }
    return d;
}

} // namespace

TEST_CASE("shaper orthogonality: G^H G = I at M in {8, 64, 1024}") {
    for (int m : {8, 64, 1024}) {
        Shaper ofdm = Shaper::build(Shaper::Kind::kOfdmCp, m);
        Shaper cpsc = Shaper::build(Shaper::Kind::kCpSc, m, 0.22);
        Shaper oqam = Shaper::build(Shaper::Kind::kOqamSc, m, 0.0); // flat profile
        for (const Shaper* sh : {&ofdm, &cpsc, &oqam}) {
            CMat g = sh->dense();
            CMat gram = g.adjoint() * g;
            double err = (gram - CMat::Identity(m / 2, m / 2)).cwiseAbs().maxCoeff();
            CHECK(err < 1e-12);
        }
    }
}

TEST_CASE("OQAM with an RRC profile is orthogonal in the real field") {
    Shaper oqam = Shaper::build(Shaper::Kind::kOqamSc, 64, 0.22);
    CMat g = oqam.dense();
    CMat gram = g.adjoint() * g;
    double err = (gram.real() - RMat::Identity(32, 32)).cwiseAbs().maxCoeff();
    CHECK(err < 1e-12);
}

TEST_CASE("shaper structure details") {
    // OFDM: each column is a standard basis vector on a center tone
    Shaper ofdm = Shaper::build(Shaper::Kind::kOfdmCp, 8);
    CMat g = ofdm.dense();
    for (int c = 0; c < 4; ++c) {
        CHECK(g.col(c).cwiseAbs().sum() == doctest::Approx(1.0));
        int row;
        g.col(c).cwiseAbs().maxCoeff(&row);
        int tone = row - 4;
        CHECK(tone >= -2);
        CHECK(tone < 2); // center M/2 tones
    }

    // CP-SC with a flat profile: Lambda = 1/sqrt(2) after normalization
    Shaper flat = Shaper::build(Shaper::Kind::kCpSc, 16, 0.0);
    for (int i = 0; i < 16; ++i) CHECK(flat.profile()(i) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CMat gram = flat.dense().adjoint() * flat.dense();
    CHECK((gram - CMat::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);

    // reduce is the adjoint of expand for the complex-symbol kinds
    RngStream rng(5);
    for (auto kind : {Shaper::Kind::kOfdmCp, Shaper::Kind::kCpSc}) {
        Shaper sh = Shaper::build(kind, 32, 0.22);
        CVec s(16), y(32);
        for (int i = 0; i < 16; ++i) s(i) = rng.next_cnormal();
        for (int i = 0; i < 32; ++i) y(i) = rng.next_cnormal();
        cplx lhs = (y.conjugate().cwiseProduct(sh.expand(s))).sum();
        cplx rhs = (sh.reduce(y).conjugate().cwiseProduct(s)).sum();
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }

    CHECK_THROWS_AS(Shaper::build(Shaper::Kind::kOfdmCp, 6), std::invalid_argument);
}

TEST_CASE("block operator: identity channel reduces to per-antenna DFT") {
    const int m = 16, n = 4;
    WidebandChannel ch;
    ch.per_tone.assign(m, CMat::Identity(n, n));
    RngStream rng(7);
    CMat x(n, m);
    for (int t = 0; t < m; ++t)
        for (int i = 0; i < n; ++i) x(i, t) = rng.next_cnormal();
    CMat y = block_forward(x, ch, 1.0);
    CMat xhat = centered_dft_rows(x);
    CHECK((y - xhat).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("block operator adjoint identity") {
    const int m = 16, n = 5, k = 3;
    WidebandChannel ch = random_channel(k, n, m, 11);
    RngStream rng(13);
    for (int t = 0; t < 20; ++t) {
        CVec x(n * m), y(k * m);
        for (int i = 0; i < n * m; ++i) x(i) = rng.next_cnormal();
        for (int i = 0; i < k * m; ++i) y(i) = rng.next_cnormal();
        double beta = 0.5 + rng.next_uniform();
        cplx lhs = (y.conjugate().cwiseProduct(apply_block_operator(x, ch, beta))).sum();
        cplx rhs = (apply_block_operator_adjoint(y, ch, beta).conjugate().cwiseProduct(x)).sum();
        CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("block operator matches the dense Kronecker construction") {
    const int m = 4, n = 2, k = 1;
    WidebandChannel ch = random_channel(k, n, m, 17);
    CMat a = dense_block_operator(ch, 1.3);
    RngStream rng(19);
    for (int t = 0; t < 10; ++t) {
        CVec x(n * m);
        for (int i = 0; i < n * m; ++i) x(i) = rng.next_cnormal();
        CVec fast = apply_block_operator(x, ch, 1.3);
        CVec dense = a * x;
        CHECK((fast - dense).cwiseAbs().maxCoeff() < 1e-12);
        CVec y(k * m);
        for (int i = 0; i < k * m; ++i) y(i) = rng.next_cnormal();
        CHECK((apply_block_operator_adjoint(y, ch, 1.3) - a.adjoint() * y).cwiseAbs().maxCoeff() <
              1e-12);
    }
}

TEST_CASE("block output step: fixed points and trace slope") {
    const int m = 8, k = 2;
    Shaper sh = Shaper::build(Shaper::Kind::kCpSc, m, 0.22);
    RngStream rng(23);
    Eigen::MatrixXi idx;
    CMat data = random_qam_data(k, m / 2, 4, rng, &idx);
    auto regions = block_data_regions(data, Constellation::qam(4), true, false);

    // u = G s with feasible s, theta = 0: z = 0
    CMat u0(k, m);
    for (int kk = 0; kk < k; ++kk)
        u0.row(kk) = sh.expand(data.row(kk).transpose()).transpose();
    BlockOutput out0 = block_output_step(u0, data, regions, 0.0, sh);
    CHECK(out0.z.cwiseAbs().maxCoeff() < 1e-12);

    // all-inner data: clamp slopes are zero, trace = 1/(1+theta)
    CMat inner = CMat::Constant(k, m / 2, cplx{1.0, 1.0});
    auto inner_regions = block_data_regions(inner, Constellation::qam(4), true, false);
    CMat ur(k, m);
    for (int kk = 0; kk < k; ++kk)
        for (int i = 0; i < m; ++i) ur(kk, i) = rng.next_cnormal();
    BlockOutput oi = block_output_step(ur, inner, inner_regions, 0.4, sh);
    CHECK(oi.trace_slope == doctest::Approx(1.0 / 1.4));
}

TEST_CASE("block output step equals the dense arithmetic at M=8 K=2") {
    const int m = 8, k = 2;
    for (auto kind : {Shaper::Kind::kOfdmCp, Shaper::Kind::kCpSc}) {
        Shaper sh = Shaper::build(kind, m, 0.22);
        CMat g = sh.dense();
        RngStream rng(29);
        Eigen::MatrixXi idx;
        CMat data = random_qam_data(k, m / 2, 4, rng, &idx);
        auto regions = block_data_regions(data, Constellation::qam(4), true, false);
        const double theta = 0.6;

        CMat u(k, m);
        for (int kk = 0; kk < k; ++kk)
            for (int i = 0; i < m; ++i) u(kk, i) = 2.0 * rng.next_cnormal();

        BlockOutput out = block_output_step(u, data, regions, theta, sh);

        // dense route per user: z = (G prox(G^H u) - u) / (1 + theta)
        for (int kk = 0; kk < k; ++kk) {
            CVec u_k = u.row(kk).transpose();
            CVec r = g.adjoint() * u_k;
            CVec s(m / 2);
            for (int c = 0; c < m / 2; ++c)
                s(c) = ace_project(r(c), regions[kk * (m / 2) + c]).s;
            CVec z_dense = (g * s - u_k) / (1.0 + theta);
            CHECK((out.z.row(kk).transpose() - z_dense).cwiseAbs().maxCoeff() < 1e-10);
        }

        // trace of the Jacobian via central finite differences; the slope
        // convention differentiates w.r.t. the first argument -u, so the
        // u-derivative trace enters with a minus sign
        double tr = 0.0;
        const double h = 1e-6;
        for (int kk = 0; kk < k; ++kk)
            for (int i = 0; i < m; ++i) {
                for (int axis = 0; axis < 2; ++axis) {
                    CMat up = u, um = u;
                    cplx delta = axis == 0 ? cplx{h, 0.0} : cplx{0.0, h};
                    up(kk, i) += delta;
                    um(kk, i) -= delta;
                    BlockOutput op = block_output_step(up, data, regions, theta, sh);
                    BlockOutput om = block_output_step(um, data, regions, theta, sh);
                    cplx diff = (op.z(kk, i) - om.z(kk, i)) / (2.0 * h);
                    tr += 0.5 * (axis == 0 ? diff.real() : diff.imag());
                }
            }
        CHECK(out.trace_slope == doctest::Approx(-tr / (m * k)).epsilon(1e-6));
    }
}

TEST_CASE("update_beta: exact match, homogeneity, dense equivalence") {
    const int m = 8, n = 4, k = 2;
    Shaper sh = Shaper::build(Shaper::Kind::kOfdmCp, m);
    RngStream rng(31);
    Eigen::MatrixXi idx;
    CMat data = random_qam_data(k, m / 2, 4, rng, &idx);

    // identity channel, x chosen so that Diag(H) F x = G s exactly
    WidebandChannel id;
    id.per_tone.assign(m, CMat::Identity(k, k));
    CMat gs(k, m);
    for (int kk = 0; kk < k; ++kk)
        gs.row(kk) = sh.expand(data.row(kk).transpose()).transpose();
    CMat x_time = centered_idft_rows(gs);
    CHECK(update_beta(x_time, data, sh, id, 0.0) == doctest::Approx(1.0));

    // homogeneity: x -> c x scales beta by 1/c at sigma = 0
    double b1 = update_beta(x_time, data, sh, id, 0.0);
    double b2 = update_beta(CMat(2.0 * x_time), data, sh, id, 0.0);
    CHECK(b2 == doctest::Approx(0.5 * b1));

    // dense evaluation on a random channel
    WidebandChannel ch = random_channel(k, n, m, 37);
    CMat xr(n, m);
    for (int t = 0; t < m; ++t)
        for (int i = 0; i < n; ++i) xr(i, t) = rng.next_cnormal();
    double sn2 = 0.3;
    double fast = update_beta(xr, data, sh, ch, sn2);

    CMat a = dense_block_operator(ch, 1.0);
    CMat g = sh.dense();
    CVec xs = Eigen::Map<const CVec>(xr.data(), n * m);
    CVec v = a * xs;
    // (G (x) I_K) s with s stacked symbol-major
    CVec gs_stack = CVec::Zero(m * k);
    for (int kk = 0; kk < k; ++kk) {
        CVec gk = g * data.row(kk).transpose();
        for (int i = 0; i < m; ++i) gs_stack(i * k + kk) = gk(i);
    }
    double expected = (gs_stack.conjugate().cwiseProduct(v)).sum().real() /
                      (v.squaredNorm() + k * m * sn2);
    CHECK(fast == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("beta refit never increases the block cost") {
    const int m = 8, n = 4, k = 2;
    Shaper sh = Shaper::build(Shaper::Kind::kCpSc, m, 0.22);
    WidebandChannel ch = random_channel(k, n, m, 41);
    RngStream rng(43);
    Eigen::MatrixXi idx;
    BlockProblem pb;
    pb.channel = &ch;
    pb.data = random_qam_data(k, m / 2, 4, rng, &idx);
    pb.sigma_n_sq = 0.2;
    pb.constellation = Constellation::qam(4);
    pb.shaper = &sh;
    auto regions = block_data_regions(pb.data, pb.constellation, true, false);

    PhaseAlphabet alphabet(2);
    for (int trial = 0; trial < 20; ++trial) {
        CMat x(n, m);
        for (int t = 0; t < m; ++t)
            for (int i = 0; i < n; ++i)
                x(i, t) = alphabet.point(static_cast<int>(rng.next_below(4)));
        double beta_prev = 0.2 + 3.0 * rng.next_uniform();
        double cost_prev = block_cost(x, beta_prev, pb, regions);

        // one exact coordinate step: s from beta_prev, then the closed form
        CMat v = block_forward(x, ch, 1.0);
        CMat s_all(k, m / 2);
        for (int kk = 0; kk < k; ++kk) {
            CVec reduced = sh.reduce(CVec(beta_prev * v.row(kk).transpose()));
            for (int c = 0; c < m / 2; ++c)
                s_all(kk, c) = ace_project(reduced(c), regions[kk * (m / 2) + c]).s;
        }
        double beta_new = update_beta(x, s_all, sh, ch, pb.sigma_n_sq);
        CHECK(block_cost(x, beta_new, pb, regions) <= cost_prev + 1e-12);
    }
}

TEST_CASE("run_block_gamp: solution in the alphabet, toy exhaustive optimality") {
    const int m = 4, n = 2, k = 1;
    PhaseAlphabet alphabet(1);
    Constellation qpsk = Constellation::qpsk();
    Shaper sh = Shaper::build(Shaper::Kind::kOfdmCp, m);

    int good = 0;
    for (int trial = 0; trial < 100; ++trial) {
        RngStream root = RngStream(555).substream(trial);
        WidebandChannel ch = random_channel(k, n, m, 1000 + trial);
        Eigen::MatrixXi idx;
        CMat data = random_qam_data(k, m / 2, 2, root, &idx);
        auto regions = block_data_regions(data, qpsk, true, false);
        const double sn2 = 0.1;

        BlockProblem pb;
        pb.channel = &ch;
        pb.data = data;
        pb.sigma_n_sq = sn2;
        pb.constellation = qpsk;
        pb.alphabet = alphabet;
        pb.shaper = &sh;

        // exhaustive oracle over |X|^{MN} = 2^8 candidates
        double best = 1e300;
        for (int mask = 0; mask < 256; ++mask) {
            CMat x(n, m);
            for (int i = 0; i < n * m; ++i)
                x(i % n, i / n) = alphabet.point((mask >> i) & 1);
            double beta = block_genie_beta(x, ch, sh, regions, sn2);
            best = std::min(best, block_cost(x, beta, pb, regions));
        }

        BlockResult res = run_block_gamp(pb, GampConfig{});
        for (int t = 0; t < m; ++t)
            for (int i = 0; i < n; ++i) {
                double dmin = 1e300;
                for (cplx p : alphabet.points())
                    dmin = std::min(dmin, std::abs(res.x_time(i, t) - p));
                CHECK(dmin < 1e-15);
            }
        double got = block_cost(res.x_time, block_genie_beta(res.x_time, ch, sh, regions, sn2),
                                pb, regions);
        if (got <= 1.05 * best + 1e-12) ++good;
    }
    CHECK(good >= 80);
}

TEST_CASE("run_block_gamp converges and decodes at high SNR (OFDM, CP-SC, OQAM)") {
    const int m = 32, n = 16, k = 3;
    RngStream rng(61);
    FlatChannel flat = draw_iid_flat(k, n, rng);
    WidebandChannel ch = block_fading_from_flat(flat, m);

    // QPSK over OFDM and single carrier
    for (auto kind : {Shaper::Kind::kOfdmCp, Shaper::Kind::kCpSc}) {
        Shaper sh = Shaper::build(kind, m, 0.22);
        Eigen::MatrixXi idx;
        CMat data = random_qam_data(k, m / 2, 2, rng, &idx);
        BlockProblem pb;
        pb.channel = &ch;
        pb.data = data;
        pb.sigma_n_sq = 1e-3;
        pb.constellation = Constellation::qpsk();
        pb.alphabet = PhaseAlphabet(3);
        pb.shaper = &sh;
        BlockResult res = run_block_gamp(pb, GampConfig{});
        CMat y = block_forward(res.x_time, ch, 1.0);
        int errs = 0;
        for (int kk = 0; kk < k; ++kk) {
            CVec r = res.beta * sh.reduce(CVec(y.row(kk).transpose()));
            for (int c = 0; c < m / 2; ++c)
                if (hard_detect_index(r(c), pb.constellation) != idx(kk, c)) ++errs;
        }
        CHECK(errs == 0); // noiseless decode at the receiver gain
    }

    // real PAM over OQAM rails
    {
        Shaper sh = Shaper::build(Shaper::Kind::kOqamSc, m, 0.0);
        Constellation cons = Constellation::qam(2); // +-1 levels per rail
        Eigen::MatrixXi idx(k, m / 2);
        CMat data(k, m / 2);
        for (int kk = 0; kk < k; ++kk)
            for (int c = 0; c < m / 2; ++c) {
                int i = static_cast<int>(rng.next_below(2));
                idx(kk, c) = i;
                data(kk, c) = cplx{2.0 * i - 1.0, 0.0};
            }
        BlockProblem pb;
        pb.channel = &ch;
        pb.data = data;
        pb.sigma_n_sq = 1e-3;
        pb.constellation = cons;
        pb.alphabet = PhaseAlphabet(2);
        pb.shaper = &sh;
        BlockResult res = run_block_gamp(pb, GampConfig{});
        CMat y = block_forward(res.x_time, ch, 1.0);
        int errs = 0;
        for (int kk = 0; kk < k; ++kk) {
            CVec r = res.beta * sh.reduce(CVec(y.row(kk).transpose()));
            for (int c = 0; c < m / 2; ++c) {
                int det = r(c).real() >= 0.0 ? 1 : 0;
                if (det != idx(kk, c)) ++errs;
            }
        }
        CHECK(errs == 0);
    }
}
