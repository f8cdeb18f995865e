#include "precode/bessel.hpp"

#include <cmath>

#include "precode/types.hpp"

namespace precode {

// J1(x) = sum_k (-1)^k / (k! (k+1)!) (x/2)^{2k+1}
static double j1_series(double x) {
    const long double h = 0.5L * static_cast<long double>(x);
    long double term = h; // k = 0
    long double sum = term;
    for (int k = 1; k <= 40; ++k) {
        term *= -(h * h) / (static_cast<long double>(k) * (k + 1));
        sum += term;
        if (std::fabs(static_cast<double>(term)) <
            1e-20 * std::fabs(static_cast<double>(sum)))
            break;
    }
    return static_cast<double>(sum);
}

// Hankel expansion: J1(x) ~ sqrt(2/(pi x)) [P cos(chi) - Q sin(chi)],
// chi = x - 3 pi/4, with P/Q summed to optimal truncation.
static double j1_asymptotic(double x) {
    const long double lx = x;
    long double p = 1.0L, q = 0.0L;
    long double ak = 1.0L; // A_k = prod (4 - (2m-1)^2) / (m 8), term A_k / x^k
    long double xpow = 1.0L;
    long double prev = 1e30L;
    for (int k = 1; k <= 30; ++k) {
        ak *= (4.0L - (2.0L * k - 1) * (2.0L * k - 1)) / (8.0L * k);
        xpow *= lx;
        long double term = ak / xpow;
        if (std::fabs(static_cast<double>(term)) >
            std::fabs(static_cast<double>(prev)))
            break; // divergent tail reached
        prev = term;
        if (k % 2 == 1) {
            q += (k % 4 == 1) ? term : -term;
        } else {
            p += (k % 4 == 2) ? -term : term;
        }
        if (std::fabs(static_cast<double>(term)) < 1e-19) break;
    }
    const long double chi = lx - 0.75L * 3.141592653589793238462643383279503L;
    long double val = std::sqrt(2.0L / (3.141592653589793238462643383279503L * lx)) *
                      (p * std::cos(chi) - q * std::sin(chi));
    return static_cast<double>(val);
}

double bessel_j1(double x) {
    if (x < 0.0) return -bessel_j1(-x);
    if (x < 8.0) return j1_series(x);
    return j1_asymptotic(x);
}

} // namespace precode
