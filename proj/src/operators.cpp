#include "dfsblock/operators.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <atomic>
#include <cmath>
#include <cstdlib>

namespace dfsblock {

namespace {
int env_max_qubits() {
  if (const char* env = std::getenv("DFSBLOCK_MAX_QUBITS")) {
    const int v = std::atoi(env);
    if (v >= 1 && v <= 30) return v;
  }
  return kDefaultMaxQubits;
}
std::atomic<int>& max_qubits_slot() {
  static std::atomic<int> slot{env_max_qubits()};
  return slot;
}
}  // namespace

int max_qubits() { return max_qubits_slot().load(); }
void set_max_qubits(int n) {
  if (n < 1 || n > 30) throw ValidationError("max qubit cap out of range");
  max_qubits_slot().store(n);
}

double wrap_angle(double phi) {
  double w = std::remainder(phi, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

double circle_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

OperatorExpr& OperatorExpr::operator+=(const PauliTerm& term) {
  terms.push_back(term);
  return *this;
}

OperatorExpr& OperatorExpr::operator+=(const OperatorExpr& other) {
  terms.insert(terms.end(), other.terms.begin(), other.terms.end());
  return *this;
}

OperatorExpr OperatorExpr::operator*(Complex scale) const {
  OperatorExpr out = *this;
  for (auto& t : out.terms) t.coefficient *= scale;
  return out;
}

PauliTerm pauli(Axis axis, int site, Complex coefficient) {
  PauliTerm t;
  t.coefficient = coefficient;
  t.factors[site] = axis;
  return t;
}

PauliTerm pauli_pair(Axis a1, int s1, Axis a2, int s2, Complex coefficient) {
  if (s1 == s2) throw ValidationError("pauli_pair: sites must be distinct");
  PauliTerm t;
  t.coefficient = coefficient;
  t.factors[s1] = a1;
  t.factors[s2] = a2;
  return t;
}

OperatorExpr collective_operator(Axis axis, const std::set<int>& sites) {
  if (sites.empty()) throw ValidationError("collective_operator: empty site set");
  OperatorExpr expr;
  for (int s : sites) expr += pauli(axis, s);
  return expr;
}

MatrixOperator MatrixOperator::from_dense(Matrix m) {
  if (m.rows() != m.cols()) throw ValidationError("MatrixOperator: non-square matrix");
  MatrixOperator op;
  op.storage_ = std::move(m);
  return op;
}

MatrixOperator MatrixOperator::from_sparse(SpMatrix m) {
  if (m.rows() != m.cols()) throw ValidationError("MatrixOperator: non-square matrix");
  MatrixOperator op;
  m.makeCompressed();
  op.storage_ = std::move(m);
  return op;
}

MatrixOperator MatrixOperator::identity(Index dim) {
  return from_dense(Matrix::Identity(dim, dim));
}

MatrixOperator MatrixOperator::zero(Index dim) {
  return from_dense(Matrix::Zero(dim, dim));
}

Index MatrixOperator::dim() const {
  if (is_dense_storage()) return std::get<Matrix>(storage_).rows();
  return std::get<SpMatrix>(storage_).rows();
}

Matrix MatrixOperator::dense() const {
  if (is_dense_storage()) return std::get<Matrix>(storage_);
  const SpMatrix& s = std::get<SpMatrix>(storage_);
  if (s.rows() > kDenseDimensionCap)
    throw CapacityError("dense materialization above the dense dimension cap");
  return Matrix(s);
}

SpMatrix MatrixOperator::sparse() const {
  if (!is_dense_storage()) return std::get<SpMatrix>(storage_);
  return std::get<Matrix>(storage_).sparseView();
}

Vector MatrixOperator::apply(const Vector& v) const {
  if (v.size() != dim()) throw ValidationError("apply: dimension mismatch");
  if (is_dense_storage()) return std::get<Matrix>(storage_) * v;
  return std::get<SpMatrix>(storage_) * v;
}

Complex MatrixOperator::trace() const {
  if (is_dense_storage()) return std::get<Matrix>(storage_).trace();
  const SpMatrix& s = std::get<SpMatrix>(storage_);
  Complex tr{0.0, 0.0};
  for (Index k = 0; k < s.rows(); ++k) tr += s.coeff(k, k);
  return tr;
}

MatrixOperator MatrixOperator::adjoint() const {
  if (is_dense_storage()) return from_dense(std::get<Matrix>(storage_).adjoint());
  return from_sparse(SpMatrix(std::get<SpMatrix>(storage_).adjoint()));
}

bool MatrixOperator::is_hermitian(double tol) const {
  if (is_dense_storage()) {
    const Matrix& m = std::get<Matrix>(storage_);
    return (m - m.adjoint()).cwiseAbs().maxCoeff() < tol;
  }
  const SpMatrix& s = std::get<SpMatrix>(storage_);
  SpMatrix d = s - SpMatrix(s.adjoint());
  double worst = 0.0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SpMatrix::InnerIterator it(d, k); it; ++it)
      worst = std::max(worst, std::abs(it.value()));
  return worst < tol;
}

bool MatrixOperator::is_unitary(double tol) const {
  const Matrix m = dense();
  const Matrix g = m.adjoint() * m - Matrix::Identity(m.rows(), m.cols());
  return spectral_norm(g) < tol;
}

MatrixOperator MatrixOperator::operator+(const MatrixOperator& rhs) const {
  if (dim() != rhs.dim()) throw ValidationError("operator+: dimension mismatch");
  if (!is_dense_storage() && !rhs.is_dense_storage())
    return from_sparse(SpMatrix(sparse() + rhs.sparse()));
  return from_dense(dense() + rhs.dense());
}

MatrixOperator MatrixOperator::operator-(const MatrixOperator& rhs) const {
  return *this + rhs * Complex{-1.0, 0.0};
}

MatrixOperator MatrixOperator::operator*(const MatrixOperator& rhs) const {
  if (dim() != rhs.dim()) throw ValidationError("operator*: dimension mismatch");
  if (!is_dense_storage() && !rhs.is_dense_storage())
    return from_sparse(SpMatrix(sparse() * rhs.sparse()));
  return from_dense(dense() * rhs.dense());
}

MatrixOperator MatrixOperator::operator*(Complex scale) const {
  if (is_dense_storage()) return from_dense(std::get<Matrix>(storage_) * scale);
  return from_sparse(SpMatrix(std::get<SpMatrix>(storage_) * scale));
}

namespace {

void check_realize_inputs(const OperatorExpr& expr, int n) {
  if (n < 1) throw ValidationError("realize: need at least one qubit");
  if (n > max_qubits()) throw CapacityError("realize: qubit count above configured maximum");
  for (const auto& term : expr.terms)
    for (const auto& [site, axis] : term.factors) {
      (void)axis;
      if (site < 0 || site >= n) throw ValidationError("realize: site index out of range");
    }
}

}  // namespace

SpMatrix realize_sparse(const OperatorExpr& expr, int n) {
  check_realize_inputs(expr, n);
  const Index dim = Index{1} << n;
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(expr.terms.size() * static_cast<size_t>(dim));
  for (const auto& term : expr.terms) {
    for (Index col = 0; col < dim; ++col) {
      Index row = col;
      Complex amp = term.coefficient;
      for (const auto& [site, axis] : term.factors) {
        const Index bitpos = Index{n - 1 - site};  // qubit 0 most significant
        const int q = static_cast<int>((col >> bitpos) & 1);
        switch (axis) {
          case Axis::X:
            row ^= (Index{1} << bitpos);
            break;
          case Axis::Y:
            row ^= (Index{1} << bitpos);
            amp *= (q == 0) ? kI : -kI;
            break;
          case Axis::Z:
            amp *= (q == 0) ? 1.0 : -1.0;
            break;
        }
      }
      if (amp != Complex{0.0, 0.0}) triplets.emplace_back(row, col, amp);
    }
  }
  SpMatrix m(dim, dim);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

MatrixOperator realize(const OperatorExpr& expr, int n) {
  SpMatrix s = realize_sparse(expr, n);
  if (s.rows() <= kDenseDimensionCap) return MatrixOperator::from_dense(Matrix(s));
  return MatrixOperator::from_sparse(std::move(s));
}

Matrix matrix_exponential(const Matrix& h, Complex scale) {
  if (!h.allFinite()) throw ValidationError("matrix_exponential: non-finite entries");
  if (h.rows() != h.cols()) throw ValidationError("matrix_exponential: non-square input");
  const bool hermitian = (h - h.adjoint()).cwiseAbs().maxCoeff() < kHermitianTol;
  if (hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const RealVector evals = es.eigenvalues();
    Vector phases(evals.size());
    for (Index k = 0; k < evals.size(); ++k) phases(k) = std::exp(scale * evals(k));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  }
  return Matrix(scale * h).exp();
}

MatrixOperator matrix_exponential(const MatrixOperator& h, Complex scale) {
  return MatrixOperator::from_dense(matrix_exponential(h.dense(), scale));
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() > kDenseDimensionCap)
    throw CapacityError("spectral_norm above the dense dimension cap");
  return m.jacobiSvd().singularValues()(0);
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double commutator_norm(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("commutator_norm: dimension mismatch");
  return spectral_norm(a * b - b * a);
}

double commutator_norm(const MatrixOperator& a, const MatrixOperator& b) {
  if (a.dim() != b.dim()) throw ValidationError("commutator_norm: dimension mismatch");
  if (a.dim() <= kDenseDimensionCap) return commutator_norm(a.dense(), b.dense());
  // Frobenius bound; only valid as an upper bound for zero-tests.
  SpMatrix c = SpMatrix(a.sparse() * b.sparse()) - SpMatrix(b.sparse() * a.sparse());
  return c.norm();
}

Index basis_index(const std::vector<int>& bits) {
  Index idx = 0;
  for (int b : bits) {
    if (b != 0 && b != 1) throw ValidationError("basis_index: bits must be 0/1");
    idx = (idx << 1) | b;
  }
  return idx;
}

Vector basis_state(Index dim, Index index) {
  if (index < 0 || index >= dim) throw ValidationError("basis_state: index out of range");
  Vector v = Vector::Zero(dim);
  v(index) = 1.0;
  return v;
}

}  // namespace dfsblock
