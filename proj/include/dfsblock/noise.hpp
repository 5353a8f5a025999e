#pragma once

// Collective-dephasing noise as classical stochastic fields: each block sees
// its own field beta_L(t) coupling through the block's collective z operator.
// Fields of different blocks are independent; per-trajectory streams are
// derived from the seed by counter-based splitting, so results do not depend
// on evaluation order. A non-collective variant (independent per-qubit
// fields) is provided as a falsification control.

#include <cstdint>

#include "dfsblock/dynamics.hpp"

namespace dfsblock {

struct DephasingModel {
  enum class Kind { Static, Piecewise };
  Kind kind = Kind::Static;
  double sigma = 0.0;   // field standard deviation (energy units)
  double tau_c = 1.0;   // refresh interval for the piecewise kind
  std::uint64_t seed = 0;
  bool collective = true;  // false: independent per-qubit fields
};

struct FidelityReport {
  int trajectories = 0;
  double mean_fidelity = 0.0;
  double fidelity_std = 0.0;
  double min_fidelity = 1.0;
  double max_leakage = 0.0;
  double model_time = 0.0;
  std::uint64_t seed = 0;
};

// Gaussian field sample for (trajectory, block, window); qubit >= 0 selects
// the per-qubit stream of the non-collective control.
double sampled_field(const DephasingModel& model, long trajectory, int block,
                     long window = 0, int qubit = -1);

// Sum over blocks of beta_L(t) S_L^z for one trajectory (default 0).
MatrixOperator sample_noise_hamiltonian(const DephasingModel& model, const ChainSpec& chain,
                                        double t, long trajectory = 0);

// Idle storage under noise: co-evolves the chain with sampled fields and
// compares against the noise-free evolution. Leakage is tracked against the
// per-block collective-z zero space whenever the input starts inside it.
FidelityReport run_immunity_experiment(const ChainSpec& chain, const DephasingModel& model,
                                       const Vector& state, double duration,
                                       int trajectories);

// Runs a compiled schedule with noise co-evolution; the fidelity is averaged
// over a fixed set of logical input states (basis states plus
// superpositions) of the blocks the schedule touches.
FidelityReport gate_under_noise(const ChainSpec& chain, const DephasingModel& model,
                                const PulseSchedule& schedule, int trajectories);

}  // namespace dfsblock
