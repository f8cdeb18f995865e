#include "precode/coupling.hpp"

#include <cmath>
#include <stdexcept>

#include "precode/bessel.hpp"

namespace precode {

CouplingMatrix coupling_matrix_upa(int side, double spacing, double lambda) {
    if (side < 1) throw std::invalid_argument("coupling_matrix_upa: side must be >= 1");
    if (!(spacing > 0.0) || !(lambda > 0.0))
        throw std::invalid_argument("coupling_matrix_upa: spacing and lambda must be > 0");

    const int n = side * side;
    const double ratio = spacing / lambda;
    CouplingMatrix cm;
    cm.side = side;
    cm.spacing_over_lambda = ratio;
    cm.b.resize(n, n);

    // element (k, l) of the grid maps to row k * side + l
    for (int k = 0; k < side; ++k)
        for (int l = 0; l < side; ++l)
            for (int m = 0; m < side; ++m)
                for (int o = 0; o < side; ++o) {
                    int row = k * side + l;
                    int col = m * side + o;
                    if (row == col) {
                        cm.b(row, col) = kPi * ratio * ratio;
                    } else {
                        double rho = std::sqrt(double((k - m) * (k - m) + (l - o) * (l - o)));
                        cm.b(row, col) = ratio * bessel_j1(2.0 * kPi * ratio * rho) / rho;
                    }
                }
    return cm;
}

} // namespace precode
