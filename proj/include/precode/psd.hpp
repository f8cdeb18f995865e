#ifndef PRECODE_PSD_HPP
#define PRECODE_PSD_HPP

#include "precode/types.hpp"

namespace precode {

/// Welch periodogram of one circular block: Hann window, hop = seg_len/4
/// (the squared Hann is constant-overlap-add at that hop, so the summed PSD
/// equals the mean power of the block exactly). Bins are centered:
/// bin i is frequency (i - L/2)/L in cycles/sample.
RVec welch_psd(const CVec& x, int seg_len);

/// Running average helper for PSD accumulation across blocks/users.
struct PsdAccumulator {
    RVec sum;
    long count = 0;
    void add(const RVec& psd) {
        if (count == 0) sum = psd; else sum += psd;
        ++count;
    }
    RVec mean() const { return sum / static_cast<double>(count); }
};

/// Adjacent-band to in-band power ratio in dB; band edges at |f| = 1/4
/// (2x oversampling: data occupies the center half of the band).
double aclr_dbc(const RVec& psd);

/// In-band / out-of-band split of a per-tone power vector (centered tones).
struct BandPower {
    double in_band;
    double out_of_band;
};
BandPower band_power_split(const RVec& per_tone);

} // namespace precode

#endif
