#include "dfsblock/device.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dfsblock {

namespace {

bool edge_is(const CouplingEdge& e, int a, int b) {
  return (e.a == a && e.b == b) || (e.a == b && e.b == a);
}

const CouplingEdge* find_edge(const BlockSpec& spec, int a, int b) {
  for (const auto& e : spec.edges)
    if (edge_is(e, a, b)) return &e;
  return nullptr;
}

void check_finite_nonzero(double v, const char* name) {
  if (!std::isfinite(v) || v == 0.0) {
    std::ostringstream os;
    os << name << " must be finite and nonzero";
    throw ValidationError(os.str());
  }
}

// Block terms with site indices offset into a larger register.
OperatorExpr block_expr_offset(const BlockSpec& spec, const CouplingSettings& k,
                               int block_index, int offset) {
  OperatorExpr expr;
  for (const auto& e : spec.edges)
    expr += pauli_pair(Axis::Z, offset + e.a, Axis::Z, offset + e.b, e.zz);
  for (const auto& [edge, strength] : k) {
    if (edge.block != block_index) continue;
    const CouplingEdge* e = find_edge(spec, edge.a, edge.b);
    if (e == nullptr) throw ValidationError("coupling setting on a nonexistent edge");
    if (!e->tunable) throw ModelError("coupling setting on a non-tunable edge");
    expr += pauli_pair(Axis::X, offset + e->a, Axis::X, offset + e->b, strength);
    expr += pauli_pair(Axis::Y, offset + e->a, Axis::Y, offset + e->b, strength);
  }
  return expr;
}

OperatorExpr interblock_expr(double strength, int left_offset, int right_offset) {
  OperatorExpr expr;
  for (int a : {0, 1})
    for (int b : {2, 3})
      expr += pauli_pair(Axis::Z, left_offset + a, Axis::Z, right_offset + b, strength);
  return expr;
}

BlockSpec block_with_vertical_pair(double J, double Jp, std::pair<int, int> v1,
                                   std::pair<int, int> v2) {
  BlockSpec spec;
  spec.J = J;
  spec.Jp = Jp;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      CouplingEdge e;
      e.a = a;
      e.b = b;
      const bool vertical = (a == v1.first && b == v1.second) ||
                            (a == v2.first && b == v2.second);
      e.zz = vertical ? Jp : J;
      e.tunable = (a == 0 && b == 1) || (a == 1 && b == 2);
      spec.edges.push_back(e);
    }
  return spec;
}

}  // namespace

Index LogicalFrame::pattern(int m) {
  switch (m) {
    case 0: return 0b1001;
    case 1: return 0b0101;
    case 2: return 0b0011;
    default: throw ValidationError("frame label out of range");
  }
}

BlockSpec standard_block(double J, double Jp) {
  check_finite_nonzero(J, "J");
  check_finite_nonzero(Jp, "J'");
  return block_with_vertical_pair(J, Jp, {0, 1}, {2, 3});
}

ChainSpec standard_chain(double J, double Jp, int blocks) {
  if (blocks < 1) throw ValidationError("chain needs at least one block");
  if (BlockSpec::kQubits * blocks > max_qubits())
    throw CapacityError("chain exceeds the configured qubit maximum");
  ChainSpec chain;
  chain.interblock_strength = J;
  for (int i = 0; i < blocks; ++i) chain.blocks.push_back(standard_block(J, Jp));
  return chain;
}

MatrixOperator block_hamiltonian(const BlockSpec& spec, const CouplingSettings& k) {
  for (const auto& [edge, strength] : k) {
    (void)strength;
    if (edge.block != 0) throw ValidationError("block_hamiltonian: block index must be 0");
  }
  return realize(block_expr_offset(spec, k, 0, 0), BlockSpec::kQubits);
}

OperatorExpr chain_expr(const ChainSpec& chain, const CouplingSettings& k) {
  for (const auto& [edge, strength] : k) {
    (void)strength;
    if (edge.block < 0 || edge.block >= chain.block_count())
      throw ValidationError("coupling setting on a nonexistent block");
  }
  OperatorExpr expr;
  for (int L = 0; L < chain.block_count(); ++L)
    expr += block_expr_offset(chain.blocks[L], k, L, 4 * L);
  for (int L = 0; L + 1 < chain.block_count(); ++L)
    expr += interblock_expr(chain.interblock_strength, 4 * L, 4 * (L + 1));
  return expr;
}

MatrixOperator chain_hamiltonian(const ChainSpec& chain, const CouplingSettings& k) {
  return realize(chain_expr(chain, k), chain.qubit_count());
}

MatrixOperator interblock_hamiltonian(const ChainSpec& chain, int L) {
  if (L < 0 || L + 1 >= chain.block_count())
    throw ValidationError("interblock_hamiltonian: block index out of range");
  return realize(interblock_expr(chain.interblock_strength, 4 * L, 4 * (L + 1)),
                 chain.qubit_count());
}

Index frame_state_index(const ChainSpec& chain, const std::vector<int>& labels) {
  if (static_cast<int>(labels.size()) != chain.block_count())
    throw ValidationError("frame_state_index: one label per block required");
  Index idx = 0;
  for (int m : labels) idx = (idx << 4) | LogicalFrame::pattern(m);
  return idx;
}

MatrixOperator effective_hamiltonian(const MatrixOperator& h,
                                     const std::vector<LogicalFrame>& frames) {
  const int k = static_cast<int>(frames.size());
  if (k == 0) throw ValidationError("effective_hamiltonian: no frames");
  const Index dim = h.dim();
  if (dim != (Index{1} << (4 * k)))
    throw ValidationError("effective_hamiltonian: frames must cover the full space");
  std::vector<int> order(frames.size());
  for (size_t i = 0; i < frames.size(); ++i) order[i] = frames[i].block;
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < k; ++i)
    if (sorted[i] != i) throw ValidationError("effective_hamiltonian: frames must cover blocks 0..k-1");

  // Indices of the 3^k product frame states, in mixed-radix label order.
  const Index frame_dim = [] (int blocks) {
    Index d = 1;
    for (int i = 0; i < blocks; ++i) d *= LogicalFrame::kStates;
    return d;
  }(k);
  std::vector<Index> embed(frame_dim);
  for (Index f = 0; f < frame_dim; ++f) {
    Index rem = f;
    std::vector<int> labels(k);
    for (int b = k - 1; b >= 0; --b) {
      labels[b] = static_cast<int>(rem % LogicalFrame::kStates);
      rem /= LogicalFrame::kStates;
    }
    Index idx = 0;
    for (int b = 0; b < k; ++b) idx = (idx << 4) | LogicalFrame::pattern(labels[b]);
    embed[f] = idx;
  }

  // Invariance check on the framed projector.
  Matrix p = Matrix::Zero(dim, dim);
  for (Index f = 0; f < frame_dim; ++f) p(embed[f], embed[f]) = 1.0;
  const double cnorm = commutator_norm(h.dense(), p);
  if (cnorm >= kInvarianceTol) {
    std::ostringstream os;
    os << "effective_hamiltonian: frame space not invariant, ||[P,H]|| = " << cnorm;
    throw ContractViolation(os.str());
  }

  const Matrix hd = h.dense();
  Matrix eff(frame_dim, frame_dim);
  for (Index r = 0; r < frame_dim; ++r)
    for (Index c = 0; c < frame_dim; ++c) eff(r, c) = hd(embed[r], embed[c]);
  return MatrixOperator::from_dense(eff);
}

Projector frame_projector(const ChainSpec& chain) {
  const Index dim = chain.dim();
  Matrix p = Matrix::Zero(dim, dim);
  std::vector<int> labels(chain.block_count(), 0);
  // Enumerate all 3^k label tuples.
  while (true) {
    const Index idx = frame_state_index(chain, labels);
    p(idx, idx) = 1.0;
    int b = chain.block_count() - 1;
    while (b >= 0 && ++labels[b] == LogicalFrame::kStates) labels[b--] = 0;
    if (b < 0) break;
  }
  return Projector(MatrixOperator::from_dense(p));
}

Projector protected_space_projector(const ChainSpec& chain) {
  const int n = chain.qubit_count();
  const Index dim = chain.dim();
  Matrix p = Matrix::Zero(dim, dim);
  for (Index idx = 0; idx < dim; ++idx) {
    bool keep = true;
    for (int L = 0; L < chain.block_count() && keep; ++L) {
      int weight = 0;
      for (int q = 0; q < 4; ++q) weight += static_cast<int>((idx >> (n - 1 - (4 * L + q))) & 1);
      keep = (weight == 2);  // collective z eigenvalue 0 per block
    }
    if (keep) p(idx, idx) = 1.0;
  }
  return Projector(MatrixOperator::from_dense(p));
}

Matrix idle_frame_matrix(double J, double Jp) {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = -2.0 * Jp;
  m(1, 1) = -2.0 * Jp;
  m(2, 2) = 2.0 * Jp - 4.0 * J;
  return m;
}

std::vector<std::vector<std::pair<int, int>>> vertical_pair_search(double J, double Jp) {
  std::vector<std::pair<int, int>> all_edges;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) all_edges.emplace_back(a, b);

  const Matrix want = idle_frame_matrix(J, Jp);
  std::vector<std::vector<std::pair<int, int>>> matches;
  for (size_t i = 0; i < all_edges.size(); ++i)
    for (size_t j = i + 1; j < all_edges.size(); ++j) {
      BlockSpec spec = block_with_vertical_pair(J, Jp, all_edges[i], all_edges[j]);
      const Matrix h = block_hamiltonian(spec, {}).dense();
      Matrix restricted(3, 3);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
          restricted(r, c) = h(LogicalFrame::pattern(r), LogicalFrame::pattern(c));
      if (max_abs(restricted - want) < 1e-12)
        matches.push_back({all_edges[i], all_edges[j]});
    }
  return matches;
}

}  // namespace dfsblock
