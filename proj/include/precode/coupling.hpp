#ifndef PRECODE_COUPLING_HPP
#define PRECODE_COUPLING_HPP

#include "precode/types.hpp"

namespace precode {

/// Conductive part of the array impedance kernel for a side x side uniform
/// planar array: diagonal pi a^2 / lambda^2, off-diagonal
/// (a/lambda) J1(2 pi (a/lambda) rho) / rho with rho the grid distance.
/// Real symmetric and positive semidefinite up to roundoff; acts as a spatial
/// low-pass that traps part of the quantization distortion in the reactive
/// field when a < lambda/2.
struct CouplingMatrix {
    RMat b;       // N x N, N = side^2
    int side;
    double spacing_over_lambda;
};

CouplingMatrix coupling_matrix_upa(int side, double spacing, double lambda);

inline CouplingMatrix coupling_matrix_upa(int side, double spacing_over_lambda) {
    return coupling_matrix_upa(side, spacing_over_lambda, 1.0);
}

} // namespace precode

#endif
