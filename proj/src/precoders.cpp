#include "precode/precoders.hpp"

#include <cmath>

#include "precode/fft.hpp"

namespace precode {

ZfResult quantized_zf_precoder(const FlatChannel& channel, const CVec& data,
                               const PhaseAlphabet& alphabet,
                               const std::vector<AceRegion>& regions,
                               double sigma_n_sq) {
    // least-norm solution of H x = d; tolerance-based pseudo-inverse covers
    // the singular case
    CVec x_lin = channel.h.completeOrthogonalDecomposition().solve(data);
    double nrm = x_lin.norm();
    if (nrm > 0.0) x_lin *= std::sqrt(static_cast<double>(channel.antennas())) / nrm;

    ZfResult res;
    res.x.resize(channel.antennas());
    for (int n = 0; n < channel.antennas(); ++n)
        res.x(n) = phase_project(x_lin(n), alphabet);
    res.beta = genie_beta(channel, res.x, regions, sigma_n_sq);
    return res;
}

static CMat shaped_target(const CMat& data, const Shaper& shaper) {
    CMat target(data.rows(), shaper.block_len());
    for (int k = 0; k < data.rows(); ++k)
        target.row(k) = shaper.expand(data.row(k).transpose()).transpose();
    return target;
}

BlockLinearResult quantized_zf_block(const WidebandChannel& channel, const CMat& data,
                                     const Shaper& shaper, const PhaseAlphabet& alphabet,
                                     const std::vector<AceRegion>& regions,
                                     double sigma_n_sq) {
    const int m = channel.dft_length();
    const int ants = channel.antennas();
    CMat target = shaped_target(data, shaper); // K x M
    CMat xhat(ants, m);
    for (int i = 0; i < m; ++i)
        xhat.col(i) = channel.per_tone[static_cast<size_t>(i)]
                          .completeOrthogonalDecomposition()
                          .solve(target.col(i));
    CMat x_time = centered_idft_rows(xhat);

    BlockLinearResult res;
    res.x_time.resize(ants, m);
    for (int t = 0; t < m; ++t)
        for (int n = 0; n < ants; ++n)
            res.x_time(n, t) = phase_project(x_time(n, t), alphabet);
    res.beta = block_genie_beta(res.x_time, channel, shaper, regions, sigma_n_sq);
    return res;
}

BlockLinearResult ideal_block_precoder(const WidebandChannel& channel, const CMat& data,
                                       const Shaper& shaper) {
    const int m = channel.dft_length();
    CMat target = shaped_target(data, shaper);
    CMat xhat(channel.antennas(), m);
    for (int i = 0; i < m; ++i)
        xhat.col(i) = channel.per_tone[static_cast<size_t>(i)]
                          .completeOrthogonalDecomposition()
                          .solve(target.col(i));
    BlockLinearResult res;
    res.x_time = centered_idft_rows(xhat);
    res.beta = 1.0;
    return res;
}

} // namespace precode
