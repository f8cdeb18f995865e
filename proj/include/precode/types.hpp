#ifndef PRECODE_TYPES_HPP
#define PRECODE_TYPES_HPP

#include <complex>
#include <Eigen/Dense>

namespace precode {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

} // namespace precode

#endif
