#include "precode/psd.hpp"

#include <cmath>
#include <stdexcept>

#include "precode/fft.hpp"

namespace precode {

RVec welch_psd(const CVec& x, int seg_len) {
    const int m = static_cast<int>(x.size());
    if (seg_len < 4 || seg_len % 4 != 0 || seg_len > m || m % (seg_len / 4) != 0)
        throw std::invalid_argument("welch_psd: bad segment length");
    const int hop = seg_len / 4;
    const int num_seg = m / hop;

    RVec window(seg_len);
    double wsq = 0.0;
    for (int n = 0; n < seg_len; ++n) {
        window(n) = 0.5 * (1.0 - std::cos(2.0 * kPi * n / seg_len)); // periodic Hann
        wsq += window(n) * window(n);
    }

    RVec psd = RVec::Zero(seg_len);
    CVec seg(seg_len);
    for (int s = 0; s < num_seg; ++s) {
        for (int n = 0; n < seg_len; ++n)
            seg(n) = window(n) * x((s * hop + n) % m); // circular block
        CVec bins = centered_dft(seg);
        psd += bins.cwiseAbs2();
    }
    // sum over bins of the result equals the mean power of x exactly
    return psd / (wsq * num_seg);
}

double aclr_dbc(const RVec& psd) {
    const int l = static_cast<int>(psd.size());
    double in_band = 0.0, adjacent = 0.0;
    for (int i = 0; i < l; ++i) {
        double f = static_cast<double>(i - l / 2) / l;
        if (std::fabs(f) < 0.25) in_band += psd(i); else adjacent += psd(i);
    }
    return 10.0 * std::log10(adjacent / in_band);
}

BandPower band_power_split(const RVec& per_tone) {
    const int m = static_cast<int>(per_tone.size());
    BandPower bp{0.0, 0.0};
    for (int i = 0; i < m; ++i) {
        double f = static_cast<double>(i - m / 2) / m;
        if (std::fabs(f) < 0.25) bp.in_band += per_tone(i); else bp.out_of_band += per_tone(i);
    }
    return bp;
}

} // namespace precode
