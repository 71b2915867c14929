#pragma once

#include <complex>
#include <Eigen/Dense>

// Shared scalar/matrix aliases. All matrices are column-major (Eigen default);
// vectorization of a matrix therefore stacks its columns.
namespace subthz {

using cdouble = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Propagation speed used throughout (m/s).
inline constexpr double kSpeedOfLight = 2.9979e8;

// Free-space wave impedance (ohm).
inline constexpr double kWaveImpedance = 377.0;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr cdouble kJ{0.0, 1.0};

}  // namespace subthz
