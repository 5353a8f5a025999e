#pragma once

// Stabilizers and projectors for noise-protected and interaction-free
// subspaces: simultaneous eigenspaces of commuting Hermitian generators,
// Gaussian-of-generator stabilizers and their projector limits, subspace
// intersection, and the invariance test [P, H] = 0.

#include <vector>

#include "dfsblock/operators.hpp"

namespace dfsblock {

// Pair (operator, eigenvalue) selecting one eigenspace of a Hermitian
// generator.
struct GeneratorConstraint {
  MatrixOperator op;
  double eigenvalue = 0.0;

  GeneratorConstraint(MatrixOperator o, double c);
};

// Orthonormal basis of a subspace, stored as columns. An empty basis
// (zero-dimensional subspace) is a legal value.
class SubspaceBasis {
 public:
  SubspaceBasis() = default;
  // vectors: dim x k with orthonormal columns (checked).
  SubspaceBasis(Index space_dim, Matrix vectors);

  Index space_dim() const { return space_dim_; }
  Index subspace_dim() const { return vectors_.cols(); }
  const Matrix& vectors() const { return vectors_; }
  Vector vector(Index k) const { return vectors_.col(k); }

 private:
  Index space_dim_ = 0;
  Matrix vectors_;  // space_dim_ rows, subspace_dim columns
};

// Hermitian idempotent with integer trace; checked on construction.
class Projector {
 public:
  explicit Projector(MatrixOperator matrix);

  const MatrixOperator& matrix() const { return matrix_; }
  Index dim() const { return matrix_.dim(); }
  Index rank() const { return rank_; }

 private:
  MatrixOperator matrix_;
  Index rank_ = 0;
};

// Orthonormal basis of the intersection of the constraint eigenspaces.
// Generators must be Hermitian and pairwise commuting (checked; ModelError
// otherwise). When the result spans computational basis states exactly, the
// basis is canonicalized to those states in ascending index order.
SubspaceBasis simultaneous_eigenspace(const std::vector<GeneratorConstraint>& constraints);

// prod_alpha exp[-Gamma (op_alpha - c_alpha I)^2]; identity on the
// simultaneous eigenspace, projector limit as Gamma grows. Gamma must be > 0.
MatrixOperator gamma_stabilizer(const std::vector<GeneratorConstraint>& constraints,
                                double gamma);

// P = sum_k v_k v_k^dagger. Errors on non-orthonormal input.
Projector projector_of(const SubspaceBasis& basis);

// Basis of {v : P1 v = v and P2 v = v}. Commuting projectors use the
// eigenvalue-1 eigenspace of P1*P2; the general path intersects the ranges
// through the eigenvalue-2 eigenspace of P1+P2.
SubspaceBasis intersect(const Projector& p1, const Projector& p2);

// Dimension of the collective-z eigenspace at eigenvalue l on m qubits:
// binomial(m, (m-l)/2); zero when |l| > m or m-l is odd.
long long dfs_dimension(int m, int l);

// True iff ||[P, H]|| < tol.
bool is_invariant(const Projector& p, const MatrixOperator& h, double tol = kInvarianceTol);

}  // namespace dfsblock
