#ifndef PRECODE_BESSEL_HPP
#define PRECODE_BESSEL_HPP

namespace precode {

/// Bessel function of the first kind, order one. Power series below x = 8,
/// Hankel asymptotic expansion above; self-contained on purpose.
double bessel_j1(double x);

} // namespace precode

#endif
