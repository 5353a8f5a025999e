#pragma once

// Pauli-string operator algebra and its realization as complex matrices on
// n-qubit Hilbert spaces. Conventions, fixed project-wide:
//   * basis states are |q_0 q_1 ... q_{n-1}> with qubit 0 the most
//     significant tensor factor,
//   * |0> is the +1 eigenstate of sigma^z.

#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "dfsblock/errors.hpp"
#include "dfsblock/types.hpp"

namespace dfsblock {

enum class Axis { X, Y, Z };

// One Pauli string with a complex coefficient. An empty factor map denotes
// coefficient * identity. Site indices must be distinct (map keys) and < n
// when realized on n qubits.
struct PauliTerm {
  Complex coefficient{1.0, 0.0};
  std::map<int, Axis> factors;
};

// A formal sum of Pauli strings. Realization is linear in the terms.
struct OperatorExpr {
  std::vector<PauliTerm> terms;

  OperatorExpr() = default;
  explicit OperatorExpr(std::vector<PauliTerm> t) : terms(std::move(t)) {}

  OperatorExpr& operator+=(const PauliTerm& term);
  OperatorExpr& operator+=(const OperatorExpr& other);
  OperatorExpr operator*(Complex scale) const;
};

// A concrete operator on a 2^n-dimensional space, stored dense or sparse.
// Hermiticity/unitarity are never assumed: is_hermitian/is_unitary run a
// verified numerical check at the stated tolerance.
class MatrixOperator {
 public:
  MatrixOperator() = default;
  static MatrixOperator from_dense(Matrix m);
  static MatrixOperator from_sparse(SpMatrix m);
  static MatrixOperator identity(Index dim);
  static MatrixOperator zero(Index dim);

  Index dim() const;
  bool is_dense_storage() const { return std::holds_alternative<Matrix>(storage_); }

  // Materializes dense entries; refuses above the dense dimension cap.
  Matrix dense() const;
  SpMatrix sparse() const;

  Vector apply(const Vector& v) const;
  Complex trace() const;
  MatrixOperator adjoint() const;

  bool is_hermitian(double tol = kHermitianTol) const;
  bool is_unitary(double tol = kUnitaryTol) const;

  MatrixOperator operator+(const MatrixOperator& rhs) const;
  MatrixOperator operator-(const MatrixOperator& rhs) const;
  MatrixOperator operator*(const MatrixOperator& rhs) const;
  MatrixOperator operator*(Complex scale) const;

 private:
  std::variant<Matrix, SpMatrix> storage_{Matrix{}};
};

// Helpers for single-term construction: pauli(Axis::Z, 0) etc.
PauliTerm pauli(Axis axis, int site, Complex coefficient = 1.0);
PauliTerm pauli_pair(Axis a1, int s1, Axis a2, int s2, Complex coefficient = 1.0);

// Sum of single-site Pauli operators on one axis over the given sites
// (collective operator). Errors on an empty site set.
OperatorExpr collective_operator(Axis axis, const std::set<int>& sites);

// Realizes a Pauli-string sum on n qubits. Dense result for small n, sparse
// above the dense cap. Errors: site index out of range (ValidationError),
// n over the configured maximum (CapacityError).
MatrixOperator realize(const OperatorExpr& expr, int n);
SpMatrix realize_sparse(const OperatorExpr& expr, int n);

// exp(scale * H). Hermitian inputs go through an eigendecomposition, which
// keeps exp(-iHt) unitary to better than 1e-10; other inputs use the dense
// Pade path. Errors on non-finite entries.
MatrixOperator matrix_exponential(const MatrixOperator& h, Complex scale);
Matrix matrix_exponential(const Matrix& h, Complex scale);

// Spectral norm of AB - BA. Dense SVD below the dense cap; Frobenius upper
// bound above it (valid for zero-tests against thresholds >= 1e-10).
double commutator_norm(const MatrixOperator& a, const MatrixOperator& b);
double commutator_norm(const Matrix& a, const Matrix& b);

double spectral_norm(const Matrix& m);
double max_abs(const Matrix& m);

// Computational-basis index of a bit pattern, qubit 0 most significant.
Index basis_index(const std::vector<int>& bits);
Vector basis_state(Index dim, Index index);

}  // namespace dfsblock
