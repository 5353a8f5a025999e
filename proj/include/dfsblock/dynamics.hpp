#pragma once

// Exact unitary evolution under piecewise-constant and smoothly ramped
// chain Hamiltonians. Phases of tracked basis states are accumulated
// continuously (unwrapped) by following <b|psi(t)> along the trajectory, so
// multi-revolution phases are recovered without 2*pi ambiguity.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dfsblock/device.hpp"

namespace dfsblock {

// Time course of one tunable coupling within a segment.
struct RampSpec {
  enum class Kind { Constant, Sin2 };
  Kind kind = Kind::Constant;
  double amplitude = 0.0;  // constant value, or envelope peak for Sin2

  static RampSpec constant(double v) { return {Kind::Constant, v}; }
  static RampSpec sin2(double peak) { return {Kind::Sin2, peak}; }

  bool is_constant() const { return kind == Kind::Constant; }
  double value_at(double t_local, double duration) const;
  // Peak |d nu/dt| over the segment (finite differences for generic ramps).
  double max_slope(double duration) const;
};

struct Segment {
  double duration = 0.0;
  std::map<EdgeRef, RampSpec> couplings;
};

struct PulseSchedule {
  std::vector<Segment> segments;
  std::map<std::string, double> metadata;  // by-product phases, predictions
  std::vector<std::string> notes;          // regime warnings etc.

  double total_duration() const;
  bool has_ramps() const;
};

// What to evolve: the full propagator, one state, or selected basis columns.
struct EvolveInput {
  enum class Kind { Unitary, State, Columns };
  Kind kind = Kind::Unitary;
  Vector state;
  std::vector<Index> columns;

  static EvolveInput identity() { return {}; }
  static EvolveInput of_state(Vector v);
  static EvolveInput basis_columns(std::vector<Index> cols);
};

struct EvolveOptions {
  std::vector<Index> tracked_states;
  const Projector* leakage_projector = nullptr;
  // Ramped stepping only. 0 = spec default ceil(50 * t_f * ||H||).
  int steps = 0;
  // Run the step-halving ladder and report the self-consistency estimate.
  bool step_diagnostics = true;
  double taylor_tol = 1e-15;
};

struct TrackedPhase {
  Index state = 0;
  double total_phase = 0.0;      // unwrapped arg <b|psi(t_f)> - arg <b|psi(0)>
  double dynamical_phase = 0.0;  // -integral <psi|H(t)|psi> dt on the evolver grid
  double final_overlap = 0.0;    // |<b|psi(t_f)>|
};

struct EvolutionResult {
  std::optional<Matrix> unitary;
  std::optional<Vector> state;
  Matrix columns;  // evolved basis columns, in input order
  std::vector<Index> column_indices;
  std::vector<TrackedPhase> tracked;
  double leakage = 0.0;  // max over evolved vectors of ||(1-P) psi||^2
  long step_count = 0;
  double max_step_error = 0.0;
  double unitarity_defect = 0.0;

  const TrackedPhase& phase_of(Index basis_state) const;
};

// One homogeneous interval handed to the engine: a constant sparse part plus
// ramped terms with local-time envelopes.
struct TimeSlice {
  double duration = 0.0;
  SpMatrix h_fixed;
  std::vector<std::pair<SpMatrix, std::function<double(double)>>> ramps;

  bool has_ramps() const { return !ramps.empty(); }
};

// Lowers a schedule onto a chain: constants into h_fixed, ramps as envelope
// terms. Validates edges exist and are tunable, durations positive.
std::vector<TimeSlice> schedule_slices(const ChainSpec& chain, const PulseSchedule& schedule);

// The engine. Constant slices evolve through exact exponentials
// (entrywise for diagonal Hamiltonians, eigendecomposition otherwise);
// ramped slices use midpoint-exponential stepping, which is unitary per step
// and second-order in the step size.
EvolutionResult evolve_time_slices(Index dim, const std::vector<TimeSlice>& slices,
                                   const EvolveInput& input, const EvolveOptions& options);

// Constant-segments-only evolution (exact per segment).
EvolutionResult evolve_piecewise(const ChainSpec& chain, const PulseSchedule& schedule,
                                 const EvolveInput& input, const EvolveOptions& options = {});

// Ramped evolution with an explicit total step budget (>= 100).
EvolutionResult evolve_ramped(const ChainSpec& chain, const PulseSchedule& schedule,
                              int steps, const EvolveInput& input,
                              const EvolveOptions& options = {});

// Quadrature of -<psi|H|psi> over a sampled trajectory (trapezoid, matching
// the evolvers' rule). Errors on a mismatched or non-increasing grid.
double dynamical_phase(const std::vector<double>& times, const std::vector<Vector>& states,
                       const std::function<SpMatrix(double)>& hamiltonian);

// Total minus dynamical phase for one tracked state, wrapped to (-pi, pi].
// The schedule must be cyclic (same couplings at start and end).
double berry_phase_residual(const EvolutionResult& result, const PulseSchedule& schedule,
                            Index tracked_state);

// min(|J-J'|^2, |2J-J'|^2) / ((1/8) max|d nu/dt|); +infinity for a flat
// ramp, GapClosureError when either gap vanishes.
double adiabaticity_margin(double J, double Jp, const RampSpec& ramp, double duration);

}  // namespace dfsblock
