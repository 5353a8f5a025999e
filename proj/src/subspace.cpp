#include "dfsblock/subspace.hpp"

#include <algorithm>
#include <cmath>

namespace dfsblock {

namespace {

// SVD rank tolerance for kernel extraction; generator spectra here are
// integer-spaced, so this leaves enormous margin.
constexpr double kKernelTol = 1e-8;

void check_orthonormal(const Matrix& vectors, double tol) {
  if (vectors.cols() == 0) return;
  const Matrix gram = vectors.adjoint() * vectors;
  const Matrix defect = gram - Matrix::Identity(gram.rows(), gram.cols());
  if (max_abs(defect) >= tol) throw ValidationError("basis is not orthonormal");
}

// If the span is exactly a set of computational basis states, replace the
// basis by those states in ascending index order. Keeps downstream state
// labels (|1001> etc.) literal.
Matrix canonicalize_if_coordinate_aligned(const Matrix& vectors) {
  if (vectors.cols() == 0) return vectors;
  const Matrix p = vectors * vectors.adjoint();
  for (Index r = 0; r < p.rows(); ++r)
    for (Index c = 0; c < p.cols(); ++c) {
      const Complex v = p(r, c);
      if (r == c) {
        if (std::abs(v) > 1e-10 && std::abs(v - 1.0) > 1e-10) return vectors;
      } else if (std::abs(v) > 1e-10) {
        return vectors;
      }
    }
  Matrix canon = Matrix::Zero(p.rows(), vectors.cols());
  Index k = 0;
  for (Index r = 0; r < p.rows(); ++r)
    if (std::real(p(r, r)) > 0.5) canon(r, k++) = 1.0;
  if (k != vectors.cols()) return vectors;
  return canon;
}

// Eigenspace at the top of the spectrum: eigenvalues above target - tol.
// Valid for projector-like operators whose admissible eigenvalue is maximal.
SubspaceBasis top_eigenspace(const Matrix& hermitian, double target, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian);
  std::vector<Index> hits;
  for (Index k = 0; k < es.eigenvalues().size(); ++k)
    if (es.eigenvalues()(k) > target - tol) hits.push_back(k);
  Matrix basis(hermitian.rows(), static_cast<Index>(hits.size()));
  for (Index j = 0; j < basis.cols(); ++j) basis.col(j) = es.eigenvectors().col(hits[j]);
  return SubspaceBasis(hermitian.rows(), canonicalize_if_coordinate_aligned(basis));
}

}  // namespace

GeneratorConstraint::GeneratorConstraint(MatrixOperator o, double c)
    : op(std::move(o)), eigenvalue(c) {
  if (!op.is_hermitian()) throw ValidationError("generator is not Hermitian");
}

SubspaceBasis::SubspaceBasis(Index space_dim, Matrix vectors)
    : space_dim_(space_dim), vectors_(std::move(vectors)) {
  if (vectors_.cols() > 0 && vectors_.rows() != space_dim_)
    throw ValidationError("SubspaceBasis: vector length differs from space dimension");
  if (vectors_.cols() == 0) vectors_.resize(space_dim_, 0);
  check_orthonormal(vectors_, kHermitianTol * 10);
}

Projector::Projector(MatrixOperator matrix) : matrix_(std::move(matrix)) {
  const Matrix p = matrix_.dense();
  if (max_abs(p - p.adjoint()) >= kHermitianTol)
    throw ValidationError("projector is not Hermitian");
  if (spectral_norm(p * p - p) >= kProjectorTol)
    throw ValidationError("projector is not idempotent");
  const double tr = std::real(p.trace());
  const double rounded = std::round(tr);
  if (std::abs(tr - rounded) >= kTraceIntegerTol)
    throw ValidationError("projector trace is not an integer");
  rank_ = static_cast<Index>(rounded);
}

SubspaceBasis simultaneous_eigenspace(const std::vector<GeneratorConstraint>& constraints) {
  if (constraints.empty()) throw ValidationError("simultaneous_eigenspace: no constraints");
  const Index dim = constraints.front().op.dim();
  for (const auto& c : constraints)
    if (c.op.dim() != dim)
      throw ValidationError("simultaneous_eigenspace: dimension mismatch");
  for (size_t i = 0; i < constraints.size(); ++i)
    for (size_t j = i + 1; j < constraints.size(); ++j)
      if (commutator_norm(constraints[i].op, constraints[j].op) >= kInvarianceTol)
        throw ModelError("simultaneous_eigenspace: generators do not commute");

  Matrix basis = Matrix::Identity(dim, dim);
  for (const auto& c : constraints) {
    if (basis.cols() == 0) break;
    const Matrix shifted =
        c.op.dense() - c.eigenvalue * Matrix::Identity(dim, dim);
    const Matrix restricted = shifted * basis;
    Eigen::JacobiSVD<Matrix> svd(restricted, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double scale = std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
    Index kept = 0;
    for (Index k = 0; k < sv.size(); ++k)
      if (sv(k) < kKernelTol * scale) ++kept;
    // Null singular vectors come last in the sorted spectrum.
    Matrix next(dim, kept);
    for (Index k = 0; k < kept; ++k)
      next.col(k) = basis * svd.matrixV().col(sv.size() - kept + k);
    // Columns of V are orthonormal, so next is orthonormal already.
    basis = std::move(next);
  }
  return SubspaceBasis(dim, canonicalize_if_coordinate_aligned(basis));
}

MatrixOperator gamma_stabilizer(const std::vector<GeneratorConstraint>& constraints,
                                double gamma) {
  if (!(gamma > 0.0)) throw ValidationError("gamma_stabilizer: Gamma must be positive");
  if (constraints.empty()) throw ValidationError("gamma_stabilizer: no constraints");
  const Index dim = constraints.front().op.dim();
  Matrix product = Matrix::Identity(dim, dim);
  for (const auto& c : constraints) {
    if (c.op.dim() != dim) throw ValidationError("gamma_stabilizer: dimension mismatch");
    const Matrix shifted = c.op.dense() - c.eigenvalue * Matrix::Identity(dim, dim);
    product = matrix_exponential(Matrix(shifted * shifted), Complex{-gamma, 0.0}) * product;
  }
  return MatrixOperator::from_dense(product);
}

Projector projector_of(const SubspaceBasis& basis) {
  check_orthonormal(basis.vectors(), kProjectorTol);
  if (basis.subspace_dim() == 0)
    return Projector(MatrixOperator::zero(basis.space_dim()));
  return Projector(MatrixOperator::from_dense(basis.vectors() * basis.vectors().adjoint()));
}

SubspaceBasis intersect(const Projector& p1, const Projector& p2) {
  if (p1.dim() != p2.dim()) throw ValidationError("intersect: dimension mismatch");
  const Matrix a = p1.matrix().dense();
  const Matrix b = p2.matrix().dense();
  if (commutator_norm(a, b) < kInvarianceTol) {
    // Commuting fast path: the product is itself a projector.
    return top_eigenspace(Matrix(a * b), 1.0, kEigenvalueOneTol);
  }
  // General ranges intersection: v is fixed by both projectors exactly when
  // (P1 + P2) v = 2v.
  return top_eigenspace(Matrix(a + b), 2.0, 2.0 * kEigenvalueOneTol);
}

long long dfs_dimension(int m, int l) {
  if (m < 0 || m > 60) throw ValidationError("dfs_dimension: qubit count out of range");
  if (std::abs(l) > m) return 0;
  if ((m - l) % 2 != 0) return 0;
  const int k = (m - l) / 2;
  long long result = 1;
  for (int i = 1; i <= k; ++i) result = result * (m - k + i) / i;
  return result;
}

bool is_invariant(const Projector& p, const MatrixOperator& h, double tol) {
  if (p.dim() != h.dim()) throw ValidationError("is_invariant: dimension mismatch");
  if (!h.is_hermitian()) throw ValidationError("is_invariant: Hamiltonian is not Hermitian");
  return commutator_norm(p.matrix(), h) < tol;
}

}  // namespace dfsblock
