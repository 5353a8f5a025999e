#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>

namespace dfsblock {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using SpMatrix = Eigen::SparseMatrix<Complex>;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

// Numerical contract tolerances. These are part of the module contracts, not
// tuning knobs; tests pin them.
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kProjectorTol = 1e-10;
inline constexpr double kTraceIntegerTol = 1e-8;
inline constexpr double kEigenvalueOneTol = 1e-8;
inline constexpr double kInvarianceTol = 1e-10;
inline constexpr double kLeakageTol = 1e-8;

// Dense linear algebra (eigendecompositions, SVDs, full propagators) is only
// attempted up to this dimension; larger operators stay sparse.
inline constexpr Index kDenseDimensionCap = 1024;

// Default cap on qubit count for realized operators; the CLI can override it
// through DFSBLOCK_MAX_QUBITS.
inline constexpr int kDefaultMaxQubits = 14;

int max_qubits();
void set_max_qubits(int n);

// Wraps an angle to (-pi, pi].
double wrap_angle(double phi);

// Distance between two angles on the circle of circumference 2*pi.
double circle_distance(double a, double b);

}  // namespace dfsblock
