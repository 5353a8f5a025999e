#include "dfsblock/noise.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dfsblock {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double to_unit(std::uint64_t v) {
  return static_cast<double>(v >> 11) * 0x1.0p-53;  // [0, 1)
}

// Counter-based standard normal: two uniforms from disjoint counters fed
// through Box-Muller. Stateless, so trajectories can run in any order.
double counter_gaussian(std::uint64_t key, std::uint64_t counter) {
  const std::uint64_t base = splitmix64(key + 0x632be59bd9b4e019ULL * counter);
  const double u1 = 1.0 - to_unit(splitmix64(base));            // (0, 1]
  const double u2 = to_unit(splitmix64(base ^ 0x9e3779b97f4a7c15ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

long window_of(const DephasingModel& model, double t) {
  if (model.kind == DephasingModel::Kind::Static) return 0;
  if (!(model.tau_c > 0.0)) throw ValidationError("piecewise noise needs tau_c > 0");
  return static_cast<long>(std::floor(t / model.tau_c));
}

// Diagonal noise term for one trajectory at a given window.
OperatorExpr noise_expr(const DephasingModel& model, const ChainSpec& chain, long trajectory,
                        long window) {
  OperatorExpr expr;
  for (int L = 0; L < chain.block_count(); ++L) {
    if (model.collective) {
      const double beta = sampled_field(model, trajectory, L, window);
      for (int q = 0; q < 4; ++q) expr += pauli(Axis::Z, 4 * L + q, beta);
    } else {
      for (int q = 0; q < 4; ++q) {
        const double beta = sampled_field(model, trajectory, L, window, q);
        expr += pauli(Axis::Z, 4 * L + q, beta);
      }
    }
  }
  return expr;
}

// Splits slices at noise refresh boundaries and adds the sampled field term.
std::vector<TimeSlice> noisy_slices(const ChainSpec& chain, std::vector<TimeSlice> base,
                                    const DephasingModel& model, long trajectory) {
  std::vector<TimeSlice> out;
  double t_global = 0.0;
  for (auto& slice : base) {
    double local = 0.0;
    while (local < slice.duration - 1e-15) {
      double span = slice.duration - local;
      if (model.kind == DephasingModel::Kind::Piecewise) {
        const double next_refresh =
            (window_of(model, t_global) + 1) * model.tau_c - t_global;
        span = std::min(span, next_refresh);
      }
      TimeSlice piece;
      piece.duration = span;
      const SpMatrix noise =
          realize_sparse(noise_expr(model, chain, trajectory, window_of(model, t_global)),
                         chain.qubit_count());
      piece.h_fixed = slice.h_fixed + noise;
      const double offset = local;
      for (const auto& [op, fn] : slice.ramps)
        piece.ramps.emplace_back(op, [fn, offset](double t) { return fn(offset + t); });
      out.push_back(std::move(piece));
      local += span;
      t_global += span;
    }
  }
  return out;
}

std::vector<TimeSlice> idle_slices(const ChainSpec& chain, double duration) {
  TimeSlice s;
  s.duration = duration;
  s.h_fixed = realize_sparse(chain_expr(chain, {}), chain.qubit_count());
  return {s};
}

struct Accumulator {
  double sum = 0.0, sum_sq = 0.0;
  double min_f = 1.0;
  int n = 0;
  void add(double f) {
    sum += f;
    sum_sq += f * f;
    min_f = std::min(min_f, f);
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double stddev() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, (sum_sq - n * m * m) / (n - 1)));
  }
};

}  // namespace

double sampled_field(const DephasingModel& model, long trajectory, int block, long window,
                     int qubit) {
  const std::uint64_t key = splitmix64(model.seed ^ 0xd1b54a32d192ed03ULL) +
                            0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(trajectory);
  const std::uint64_t counter = (static_cast<std::uint64_t>(block) << 40) |
                                (static_cast<std::uint64_t>(qubit + 1) << 32) |
                                static_cast<std::uint64_t>(static_cast<std::uint32_t>(window));
  return model.sigma * counter_gaussian(key, counter);
}

MatrixOperator sample_noise_hamiltonian(const DephasingModel& model, const ChainSpec& chain,
                                        double t, long trajectory) {
  return realize(noise_expr(model, chain, trajectory, window_of(model, t)),
                 chain.qubit_count());
}

FidelityReport run_immunity_experiment(const ChainSpec& chain, const DephasingModel& model,
                                       const Vector& state, double duration,
                                       int trajectories) {
  if (trajectories < 1) throw ValidationError("run_immunity_experiment: trajectories >= 1");
  if (std::abs(state.norm() - 1.0) > 1e-8)
    throw ValidationError("run_immunity_experiment: state not normalized");

  const Projector protected_space = protected_space_projector(chain);
  const bool inside =
      (state - protected_space.matrix().dense() * state).norm() < 1e-10;

  EvolveOptions options;
  options.step_diagnostics = false;
  if (inside) options.leakage_projector = &protected_space;

  const auto base = idle_slices(chain, duration);
  const Vector ideal =
      *evolve_time_slices(chain.dim(), base, EvolveInput::of_state(state), options).state;

  FidelityReport report;
  report.trajectories = trajectories;
  report.model_time = duration;
  report.seed = model.seed;
  Accumulator acc;
  for (long traj = 0; traj < trajectories; ++traj) {
    const auto slices = noisy_slices(chain, base, model, traj);
    const EvolutionResult res =
        evolve_time_slices(chain.dim(), slices, EvolveInput::of_state(state), options);
    acc.add(std::norm(ideal.dot(*res.state)));
    report.max_leakage = std::max(report.max_leakage, res.leakage);
  }
  report.mean_fidelity = acc.mean();
  report.fidelity_std = acc.stddev();
  report.min_fidelity = acc.min_f;
  return report;
}

FidelityReport gate_under_noise(const ChainSpec& chain, const DephasingModel& model,
                                const PulseSchedule& schedule, int trajectories) {
  if (trajectories < 1) throw ValidationError("gate_under_noise: trajectories >= 1");

  std::set<int> active;
  for (const auto& seg : schedule.segments)
    for (const auto& [edge, ramp] : seg.couplings) {
      (void)ramp;
      active.insert(edge.block);
    }
  if (active.empty()) active.insert(0);

  // Logical input set over the active blocks; inactive blocks sit in |0_L>.
  std::vector<int> blocks(active.begin(), active.end());
  std::vector<Vector> inputs;
  const Index dim = chain.dim();
  auto product_state = [&](const std::vector<int>& labels) {
    std::vector<int> all(chain.block_count(), 0);
    for (size_t i = 0; i < blocks.size(); ++i) all[blocks[i]] = labels[i];
    return basis_state(dim, frame_state_index(chain, all));
  };
  if (blocks.size() == 1) {
    inputs.push_back(product_state({0}));
    inputs.push_back(product_state({1}));
    inputs.push_back((product_state({0}) + product_state({1})) / std::sqrt(2.0));
    inputs.push_back((product_state({0}) + kI * product_state({1})) / std::sqrt(2.0));
  } else if (blocks.size() == 2) {
    inputs.push_back(product_state({0, 0}));
    inputs.push_back(product_state({0, 1}));
    inputs.push_back(product_state({1, 0}));
    inputs.push_back(product_state({1, 1}));
    inputs.push_back((product_state({0, 0}) + product_state({1, 1})) / std::sqrt(2.0));
  } else {
    throw ValidationError("gate_under_noise: schedules touching >2 blocks are unsupported");
  }

  const Projector protected_space = protected_space_projector(chain);
  EvolveOptions options;
  options.step_diagnostics = false;
  options.leakage_projector = &protected_space;

  const auto base = schedule_slices(chain, schedule);
  std::vector<Vector> ideal;
  for (const auto& in : inputs)
    ideal.push_back(
        *evolve_time_slices(dim, base, EvolveInput::of_state(in), options).state);

  FidelityReport report;
  report.trajectories = trajectories;
  report.model_time = schedule.total_duration();
  report.seed = model.seed;
  Accumulator acc;
  for (long traj = 0; traj < trajectories; ++traj) {
    const auto slices = noisy_slices(chain, base, model, traj);
    double f_sum = 0.0;
    for (size_t i = 0; i < inputs.size(); ++i) {
      const EvolutionResult res =
          evolve_time_slices(dim, slices, EvolveInput::of_state(inputs[i]), options);
      f_sum += std::norm(ideal[i].dot(*res.state));
      report.max_leakage = std::max(report.max_leakage, res.leakage);
    }
    acc.add(f_sum / inputs.size());
  }
  report.mean_fidelity = acc.mean();
  report.fidelity_std = acc.stddev();
  report.min_fidelity = acc.min_f;
  return report;
}

}  // namespace dfsblock
