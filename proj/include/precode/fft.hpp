#ifndef PRECODE_FFT_HPP
#define PRECODE_FFT_HPP

#include "precode/types.hpp"

namespace precode {

/// Unitary DFT with centered tone ordering: output index i of the forward
/// transform holds tone m = i - M/2, i.e. X[m] = (1/sqrt(M)) sum_t x_t
/// e^{-j 2 pi m t / M}. This is the "swapped halves" DFT convention used
/// throughout: tones run from -M/2 to M/2-1 everywhere.
CVec centered_dft(const CVec& time);
CVec centered_idft(const CVec& tones);

/// Row-wise transforms of an N x M matrix (each row is a time series).
CMat centered_dft_rows(const CMat& time);
CMat centered_idft_rows(const CMat& tones);

} // namespace precode

#endif
