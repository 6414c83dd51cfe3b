#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>

namespace wptlab {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kLn2 = std::numbers::ln2;
inline constexpr double kE = std::numbers::e;

}  // namespace wptlab
