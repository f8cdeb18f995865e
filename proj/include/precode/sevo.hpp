#ifndef PRECODE_SEVO_HPP
#define PRECODE_SEVO_HPP

#include "precode/constellation.hpp"
#include "precode/gamp.hpp"
#include "precode/types.hpp"

namespace precode {

/// Which precoding criterion the scalar model describes.
enum class SeCriterion { kMseNoAce, kMseAce, kSer };

/// Large-system configuration: K/N ratio, SNR = q / sigma_n^2 (linear),
/// DAC resolution (bits <= 0 means infinite resolution, constant envelope
/// only) and the receiver gain beta.
struct SeConfig {
    int bits = 2;
    double ratio = 0.5; // K/N
    double snr = 10.0;  // linear
    Constellation constellation = Constellation::qpsk();
    SeCriterion criterion = SeCriterion::kMseAce;
    double beta = 1.0;
    int quad_order = 64;      // Gauss-Hermite nodes
    int ser_quad_order = 128; // finer rule for SER tails
};

/// Fixed point of the scalar equivalent channel s_hat = theta g + u + beta n.
/// q = 1 whenever the phase alphabet is active.
struct SePoint {
    double q = 1.0;
    double nu = 0.0;
    double theta = 0.0;
    double xi = 0.0;
    double beta = 1.0;
    double sinr = 0.0;
    double mse = 0.0;
    double ser = 0.0;
    double ber = 0.0;
    double capacity = 0.0;
    bool converged = false;
    double residual = 0.0;
    int iterations = 0;
};

/// 2^b sin(pi/2^b); the b -> inf limit is pi. bits <= 0 selects that limit.
double phase_dac_factor(int bits);

/// Stein's-lemma curvature for the phase quantizer under Gaussian input:
/// theta = 2^b sin(pi/2^b) / (2 sqrt(pi nu / (beta^2 q))).
double stein_theta(double nu, double beta, double q, int bits);

/// a = 2^{2b} (N/K) sin^2(pi/2^b) / (4 pi).
double coeff_a(int bits, double n_over_k);

/// SINR(theta) = (a (1+theta)^2 - theta^2) / (1 + (1+theta)^2 / snr).
double sinr_of_theta(double theta, double a, double snr);

/// Closed-form maximizer of sinr_of_theta; the maximum sits at the fixed
/// point SINR(theta_opt) = theta_opt, and the rate is log2(1 + theta_opt).
struct SinrOpt {
    double theta_opt;
    double capacity;
};
SinrOpt sinr_opt(double a, double snr);

/// nu for the MSE criterion without ACE: (K/N) (sigma_d^2 + beta^2 q) / (1+theta)^2.
double nu_mse_no_ace(double theta, double beta, double q, double sigma_d_sq, double ratio);

/// nu for the MSE criterion with ACE on L^2-QAM (inner/outer split in closed
/// form; the outer-point integral reduced with the Gaussian of variance
/// beta^2 q / 2 per axis).
double nu_mse_ace(double theta, double beta, double q, int levels, double ratio);

/// Analytic L^2-QAM symbol error probability of the ACE scalar model.
double ser_ace(double theta, double beta, double q, int levels, double snr,
               int quad_order = 128);

/// Scalar SER-criterion output g(-u, 1, theta) for one real axis (beta = 1).
double g_scalar_ser(double u, double theta, double sigma_n);

/// nu = 2 (K/N) E[g^2] over u ~ N(0, q/2), by Gauss-Hermite.
double nu_ser(double theta, double q, double sigma_n, double ratio, int quad_order = 64);

/// BER of the QPSK SER-criterion scalar model; SER = 2 BER - BER^2.
double ber_ser(double theta, double q, double sigma_n, int quad_order = 128);
inline double ser_from_ber(double ber) { return 2.0 * ber - ber * ber; }

/// AWGN symbol error rate of the constellation at a given post-equalizer
/// SINR (used to translate the no-ACE SINR into SER/BER).
double awgn_ser(const Constellation& cons, double sinr);
double awgn_qpsk_ber(double sinr);

/// Fixed-point solvers. The no-ACE point has a closed form; the others run a
/// damped (0.5) alternation of the nu-equation and Stein's curvature from a
/// cold start, tolerance 1e-10 on the relative nu step.
SePoint solve_noace_fixed_point(const SeConfig& config);
SePoint solve_ace_fixed_point(const SeConfig& config);
SePoint solve_ser_fixed_point(const SeConfig& config);
SePoint solve_fixed_point(const SeConfig& config); // dispatch on criterion

enum class BetaObjective { kMse, kSer };

/// Golden-section search on log beta in [1e-3, 1e3] minimizing the chosen
/// objective of the criterion's fixed point (SER path has beta pinned to 1).
SePoint optimize_beta(const SeConfig& config, BetaObjective objective);

} // namespace precode

#endif
