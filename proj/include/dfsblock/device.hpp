#pragma once

// Hardware model: 4-qubit rectangular blocks with fixed zz couplings (J on
// the four rectangle horizontals/diagonals, J' on the two verticals), two
// tunable xy couplings per block, and fixed zz couplings between adjacent
// blocks in an open chain.
//
// In-block qubits are indexed 0..3; the tunable couplings live on edges
// (0,1) and (1,2). Block L couples to block L+1 through
// J * (z_0 + z_1)_L (x) (z_2 + z_3)_{L+1}.

#include <map>
#include <optional>
#include <vector>

#include "dfsblock/operators.hpp"
#include "dfsblock/subspace.hpp"

namespace dfsblock {

struct CouplingEdge {
  int a = 0;
  int b = 0;          // endpoints within the block, a < b
  double zz = 0.0;    // fixed Ising strength
  bool tunable = false;  // whether an xy term K(xx+yy) may be applied
};

struct BlockSpec {
  static constexpr int kQubits = 4;
  std::vector<CouplingEdge> edges;
  double J = 0.0;
  double Jp = 0.0;
};

struct ChainSpec {
  std::vector<BlockSpec> blocks;
  double interblock_strength = 0.0;  // open chain, nearest neighbors only

  int block_count() const { return static_cast<int>(blocks.size()); }
  int qubit_count() const { return BlockSpec::kQubits * block_count(); }
  Index dim() const { return Index{1} << qubit_count(); }
};

// Addresses one tunable coupling: block index plus in-block endpoints.
struct EdgeRef {
  int block = 0;
  int a = 0;
  int b = 0;

  auto operator<=>(const EdgeRef&) const = default;
};

using CouplingSettings = std::map<EdgeRef, double>;

// Computational frame of one block: logical |0> = |1001>, |1> = |0101>,
// ancilla |2> = |0011| (in-block bit patterns, qubit 0 leftmost).
struct LogicalFrame {
  int block = 0;

  static constexpr int kStates = 3;
  // In-block basis index (0..15) of frame state m.
  static Index pattern(int m);
};

// The standard block. The J'-edge placement {(0,1),(2,3)} is the unique K4
// assignment whose idle computational-frame restriction is
// diag(-2J', -2J', 2J'-4J); see unique_vertical_pair_assignment.
BlockSpec standard_block(double J, double Jp);

// Chain of identical standard blocks with interblock strength J.
ChainSpec standard_chain(double J, double Jp, int blocks);

// Intra-block Hamiltonian on the 16-dimensional block space. K assigns xy
// strengths to tunable edges only (ModelError otherwise); block index in the
// keys must be 0.
MatrixOperator block_hamiltonian(const BlockSpec& spec, const CouplingSettings& k);

// Symbolic chain Hamiltonian with the given tunable-coupling settings.
OperatorExpr chain_expr(const ChainSpec& chain, const CouplingSettings& k);
MatrixOperator chain_hamiltonian(const ChainSpec& chain, const CouplingSettings& k);

// Fixed coupling between blocks L and L+1, embedded in the chain space.
MatrixOperator interblock_hamiltonian(const ChainSpec& chain, int L);

// Restriction of H to the tensor product of computational frames (3^k
// dimensions). The frames must cover every block of the space H acts on, and
// H must leave the framed space invariant; a violation raises
// ContractViolation carrying the commutator norm.
MatrixOperator effective_hamiltonian(const MatrixOperator& h,
                                     const std::vector<LogicalFrame>& frames);

// Projector onto the framed computational space of the chain.
Projector frame_projector(const ChainSpec& chain);

// Projector onto the tensor product over blocks of the collective-z zero
// eigenspace (the protected space leakage is measured against).
Projector protected_space_projector(const ChainSpec& chain);

// Chain-space index of a product frame state (one label in 0..2 per block).
Index frame_state_index(const ChainSpec& chain, const std::vector<int>& labels);

// Exhaustive search over the 15 ways of choosing two K4 edges as the
// J'-edges, scoring each against the required idle frame restriction.
// Returns the matching assignments as pairs of edges; the standard layout is
// the unique hit.
std::vector<std::vector<std::pair<int, int>>> vertical_pair_search(double J, double Jp);

// Analytic 3x3 idle restriction diag(-2J', -2J', 2J'-4J).
Matrix idle_frame_matrix(double J, double Jp);

}  // namespace dfsblock
