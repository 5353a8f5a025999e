#include "dfsblock/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace dfsblock {

namespace {

constexpr double kAmplitudeFloor = 1e-12;
constexpr int kMaxUnwrapDepth = 48;

double infinity_norm(const SpMatrix& m) {
  RealVector row_sums = RealVector::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMatrix::InnerIterator it(m, k); it; ++it)
      row_sums(it.row()) += std::abs(it.value());
  return row_sums.size() == 0 ? 0.0 : row_sums.maxCoeff();
}

bool is_diagonal(const SpMatrix& m) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMatrix::InnerIterator it(m, k); it; ++it)
      if (it.row() != it.col() && std::abs(it.value()) != 0.0) return false;
  return true;
}

// Diagonal 0/1 mask of a projector when it is numerically diagonal.
std::optional<std::vector<bool>> diagonal_mask(const Projector& p) {
  const Matrix m = p.matrix().dense();
  std::vector<bool> mask(m.rows());
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (r == c) continue;
      if (std::abs(m(r, c)) > 1e-12) return std::nullopt;
    }
    const double d = std::real(m(r, r));
    if (std::abs(d) > 1e-12 && std::abs(d - 1.0) > 1e-12) return std::nullopt;
    mask[r] = d > 0.5;
  }
  return mask;
}

struct LeakageGauge {
  std::optional<std::vector<bool>> mask;
  Matrix dense;  // used when the projector is not diagonal
  bool active = false;

  explicit LeakageGauge(const Projector* p) {
    if (p == nullptr) return;
    active = true;
    mask = diagonal_mask(*p);
    if (!mask) dense = p->matrix().dense();
  }

  double of(const Vector& psi) const {
    if (!active) return 0.0;
    if (mask) {
      double leak = 0.0;
      for (Index i = 0; i < psi.size(); ++i)
        if (!(*mask)[i]) leak += std::norm(psi(i));
      return leak;
    }
    return (psi - dense * psi).squaredNorm();
  }
};

// State bundle being pushed through the slices.
struct Ensemble {
  Matrix columns;                    // dim x n_vec
  std::vector<Index> column_ids;     // basis indices (Columns/Unitary) or {-1}
  std::vector<Index> tracked;        // tracked basis states
  std::vector<Index> tracked_col;    // which column carries each tracked state
  std::vector<double> phase;         // unwrapped arg
  std::vector<double> phase_start;   // initial arg
  std::vector<double> dyn_phase;
};

Complex tracked_amp(const Ensemble& e, size_t ti) {
  return e.columns(e.tracked[ti], e.tracked_col[ti]);
}

void unwrap_step(Ensemble& e, size_t ti, Complex before, Complex after) {
  if (std::abs(before) < kAmplitudeFloor || std::abs(after) < kAmplitudeFloor)
    throw IntegrationError("phase tracking undefined: tracked amplitude vanished");
  const double delta = std::arg(after / before);
  if (std::abs(delta) > 2.6)
    throw IntegrationError("phase unwrap ambiguous: increase step count");
  e.phase[ti] += delta;
}

// ---------------------------------------------------------------------------
// Constant slices
// ---------------------------------------------------------------------------

void advance_diagonal(Ensemble& e, const SpMatrix& h, double T,
                      std::vector<double>* energies) {
  RealVector diag = RealVector::Zero(h.rows());
  for (int k = 0; k < h.outerSize(); ++k)
    for (SpMatrix::InnerIterator it(h, k); it; ++it)
      if (it.row() == it.col()) diag(it.row()) = std::real(it.value());
  Vector phases(h.rows());
  for (Index i = 0; i < h.rows(); ++i) phases(i) = std::exp(Complex{0.0, -diag(i) * T});
  for (size_t ti = 0; ti < e.tracked.size(); ++ti) {
    // Exact unwrapped phase for diagonal evolution.
    e.phase[ti] -= diag(e.tracked[ti]) * T;
    const auto col = e.columns.col(e.tracked_col[ti]);
    double energy = 0.0;
    for (Index i = 0; i < col.size(); ++i) energy += diag(i) * std::norm(col(i));
    e.dyn_phase[ti] -= energy * T;
    if (energies) (*energies)[ti] = energy;
  }
  e.columns = phases.asDiagonal() * e.columns;
}

// Recursive sampling of arg<b|psi(t)> through a constant non-diagonal slice.
double unwrap_interval(const Vector& row_weights, const RealVector& evals, double t0,
                       double t1, Complex a0, Complex a1, int depth) {
  const double delta = std::arg(a1 / a0);
  const bool ok = std::abs(a0) > kAmplitudeFloor && std::abs(a1) > kAmplitudeFloor &&
                  std::abs(delta) < 2.0;
  if (ok) return delta;
  if (depth >= kMaxUnwrapDepth)
    throw IntegrationError("phase tracking undefined: tracked amplitude vanished");
  const double tm = 0.5 * (t0 + t1);
  Complex am{0.0, 0.0};
  for (Index k = 0; k < evals.size(); ++k)
    am += row_weights(k) * std::exp(Complex{0.0, -evals(k) * tm});
  return unwrap_interval(row_weights, evals, t0, tm, a0, am, depth + 1) +
         unwrap_interval(row_weights, evals, tm, t1, am, a1, depth + 1);
}

void advance_constant(Ensemble& e, const SpMatrix& h, double T) {
  if (is_diagonal(h)) {
    advance_diagonal(e, h, T, nullptr);
    return;
  }
  if (h.rows() > kDenseDimensionCap)
    throw CapacityError("piecewise evolution above the dense dimension cap");
  const Matrix hd(h);
  Eigen::SelfAdjointEigenSolver<Matrix> es(hd);
  const RealVector& evals = es.eigenvalues();
  const Matrix& vecs = es.eigenvectors();

  // Dynamical phase first: <psi|H|psi> is constant along a constant slice.
  for (size_t ti = 0; ti < e.tracked.size(); ++ti) {
    const auto col = e.columns.col(e.tracked_col[ti]);
    e.dyn_phase[ti] -= std::real(col.dot(hd * col)) * T;
  }

  // Unwrapped phase per tracked state, sampled densely enough to resolve it.
  const double hnorm = std::max(1.0, std::abs(evals(0)) > std::abs(evals(evals.size() - 1))
                                         ? std::abs(evals(0))
                                         : std::abs(evals(evals.size() - 1)));
  const int samples = std::max(2, static_cast<int>(std::ceil(T * hnorm * 2.0)) + 1);
  for (size_t ti = 0; ti < e.tracked.size(); ++ti) {
    const Vector w = vecs.adjoint() * e.columns.col(e.tracked_col[ti]);
    Vector row_weights(evals.size());
    for (Index k = 0; k < evals.size(); ++k) row_weights(k) = vecs(e.tracked[ti], k) * w(k);
    double t_prev = 0.0;
    Complex a_prev = row_weights.sum();
    for (int s = 1; s <= samples; ++s) {
      const double t = T * s / samples;
      Complex a{0.0, 0.0};
      for (Index k = 0; k < evals.size(); ++k)
        a += row_weights(k) * std::exp(Complex{0.0, -evals(k) * t});
      e.phase[ti] += unwrap_interval(row_weights, evals, t_prev, t, a_prev, a, 0);
      t_prev = t;
      a_prev = a;
    }
  }

  Vector phases(evals.size());
  for (Index k = 0; k < evals.size(); ++k) phases(k) = std::exp(Complex{0.0, -evals(k) * T});
  e.columns = vecs * (phases.asDiagonal() * (vecs.adjoint() * e.columns));
}

// ---------------------------------------------------------------------------
// Ramped slices: midpoint-exponential stepping
// ---------------------------------------------------------------------------

struct RampedSlice {
  const TimeSlice* slice;
  int steps;
};

Vector apply_h(const TimeSlice& s, double t_local, const Vector& v) {
  Vector out = s.h_fixed * v;
  for (const auto& [op, fn] : s.ramps) out += fn(t_local) * (op * v);
  return out;
}

void taylor_exp_apply(const TimeSlice& s, double t_mid, double dt, Vector& psi,
                      double tol) {
  Vector term = psi;
  const Complex factor{0.0, -dt};
  for (int j = 1; j <= 80; ++j) {
    term = (factor / static_cast<double>(j)) * apply_h(s, t_mid, term);
    psi += term;
    if (term.norm() < tol * std::max(1.0, psi.norm())) return;
  }
  throw IntegrationError("matrix-exponential Taylor series did not converge");
}

void advance_ramped(Ensemble& e, const TimeSlice& s, int steps, double taylor_tol) {
  const double dt = s.duration / steps;
  const Index nvec = e.columns.cols();
  std::vector<double> energy_prev(e.tracked.size());
  for (size_t ti = 0; ti < e.tracked.size(); ++ti) {
    const Vector col = e.columns.col(e.tracked_col[ti]);
    energy_prev[ti] = std::real(col.dot(apply_h(s, 0.0, col)));
  }
  for (int k = 0; k < steps; ++k) {
    const double t_mid = (k + 0.5) * dt;
    const double t_next = (k + 1.0) * dt;
    std::vector<Complex> amps_before(e.tracked.size());
    for (size_t ti = 0; ti < e.tracked.size(); ++ti) amps_before[ti] = tracked_amp(e, ti);

    for (Index c = 0; c < nvec; ++c) {
      Vector psi = e.columns.col(c);
      taylor_exp_apply(s, t_mid, dt, psi, taylor_tol);
      e.columns.col(c) = psi;
    }

    for (size_t ti = 0; ti < e.tracked.size(); ++ti) {
      unwrap_step(e, ti, amps_before[ti], tracked_amp(e, ti));
      const Vector col = e.columns.col(e.tracked_col[ti]);
      const double energy = std::real(col.dot(apply_h(s, t_next, col)));
      e.dyn_phase[ti] -= 0.5 * dt * (energy_prev[ti] + energy);
      energy_prev[ti] = energy;
    }
  }
}

// ---------------------------------------------------------------------------

Ensemble make_ensemble(Index dim, const EvolveInput& input, const EvolveOptions& options) {
  Ensemble e;
  switch (input.kind) {
    case EvolveInput::Kind::Unitary:
      if (dim > kDenseDimensionCap)
        throw CapacityError("full-propagator evolution above the dense dimension cap");
      e.columns = Matrix::Identity(dim, dim);
      e.column_ids.resize(dim);
      for (Index i = 0; i < dim; ++i) e.column_ids[i] = i;
      break;
    case EvolveInput::Kind::State: {
      if (input.state.size() != dim) throw ValidationError("evolve: state dimension mismatch");
      const double n = input.state.norm();
      if (std::abs(n - 1.0) > 1e-8) throw ValidationError("evolve: state not normalized");
      e.columns = Matrix(dim, 1);
      e.columns.col(0) = input.state;
      e.column_ids = {Index{-1}};
      break;
    }
    case EvolveInput::Kind::Columns: {
      e.columns = Matrix::Zero(dim, static_cast<Index>(input.columns.size()));
      for (size_t i = 0; i < input.columns.size(); ++i) {
        if (input.columns[i] < 0 || input.columns[i] >= dim)
          throw ValidationError("evolve: basis column out of range");
        e.columns(input.columns[i], static_cast<Index>(i)) = 1.0;
      }
      e.column_ids = input.columns;
      break;
    }
  }
  for (Index b : options.tracked_states) {
    if (b < 0 || b >= dim) throw ValidationError("evolve: tracked state out of range");
    Index col = -1;
    if (input.kind == EvolveInput::Kind::State) {
      col = 0;
    } else {
      for (size_t c = 0; c < e.column_ids.size(); ++c)
        if (e.column_ids[c] == b) col = static_cast<Index>(c);
      if (col < 0)
        throw ValidationError("evolve: tracked state is not among the evolved columns");
    }
    const Complex a0 = e.columns(b, col);
    if (std::abs(a0) < kAmplitudeFloor)
      throw ValidationError("evolve: tracked state has zero initial amplitude");
    e.tracked.push_back(b);
    e.tracked_col.push_back(col);
    e.phase.push_back(std::arg(a0));
    e.phase_start.push_back(std::arg(a0));
    e.dyn_phase.push_back(0.0);
  }
  return e;
}

long run_slices(Ensemble& e, const std::vector<TimeSlice>& slices,
                const std::vector<int>& ramp_steps, const EvolveOptions& options,
                const LeakageGauge& gauge, double* max_leak) {
  long total_steps = 0;
  size_t ramp_idx = 0;
  for (const auto& s : slices) {
    if (s.has_ramps()) {
      const int steps = ramp_steps[ramp_idx++];
      advance_ramped(e, s, steps, options.taylor_tol);
      total_steps += steps;
    } else {
      advance_constant(e, s.h_fixed, s.duration);
      ++total_steps;
    }
    if (gauge.active)
      for (Index c = 0; c < e.columns.cols(); ++c)
        *max_leak = std::max(*max_leak, gauge.of(e.columns.col(c)));
  }
  return total_steps;
}

std::vector<int> allocate_ramp_steps(const std::vector<TimeSlice>& slices, int total) {
  double ramped_time = 0.0;
  int ramped_count = 0;
  for (const auto& s : slices)
    if (s.has_ramps()) {
      ramped_time += s.duration;
      ++ramped_count;
    }
  std::vector<int> out;
  for (const auto& s : slices)
    if (s.has_ramps()) {
      int n = static_cast<int>(std::llround(total * s.duration / ramped_time));
      out.push_back(std::max(n, 16));
    }
  (void)ramped_count;
  return out;
}

double slice_norm_estimate(const TimeSlice& s) {
  double n = infinity_norm(s.h_fixed);
  for (const auto& [op, fn] : s.ramps) {
    double peak = 0.0;
    for (int i = 0; i <= 64; ++i)
      peak = std::max(peak, std::abs(fn(s.duration * i / 64.0)));
    n += peak * infinity_norm(op);
  }
  return n;
}

}  // namespace

double RampSpec::value_at(double t_local, double duration) const {
  switch (kind) {
    case Kind::Constant:
      return amplitude;
    case Kind::Sin2: {
      const double s = std::sin(kPi * t_local / duration);
      return amplitude * s * s;
    }
  }
  return 0.0;
}

double RampSpec::max_slope(double duration) const {
  if (is_constant()) return 0.0;
  const int grid = 4096;
  double peak = 0.0;
  double prev = value_at(0.0, duration);
  for (int i = 1; i <= grid; ++i) {
    const double t = duration * i / grid;
    const double v = value_at(t, duration);
    peak = std::max(peak, std::abs(v - prev) / (duration / grid));
    prev = v;
  }
  return peak;
}

double PulseSchedule::total_duration() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

bool PulseSchedule::has_ramps() const {
  for (const auto& s : segments)
    for (const auto& [edge, ramp] : s.couplings) {
      (void)edge;
      if (!ramp.is_constant()) return true;
    }
  return false;
}

EvolveInput EvolveInput::of_state(Vector v) {
  EvolveInput in;
  in.kind = Kind::State;
  in.state = std::move(v);
  return in;
}

EvolveInput EvolveInput::basis_columns(std::vector<Index> cols) {
  EvolveInput in;
  in.kind = Kind::Columns;
  in.columns = std::move(cols);
  return in;
}

const TrackedPhase& EvolutionResult::phase_of(Index basis_state) const {
  for (const auto& t : tracked)
    if (t.state == basis_state) return t;
  throw ValidationError("phase_of: state was not tracked");
}

std::vector<TimeSlice> schedule_slices(const ChainSpec& chain,
                                       const PulseSchedule& schedule) {
  std::vector<TimeSlice> slices;
  for (const auto& seg : schedule.segments) {
    if (!(seg.duration > 0.0)) throw ValidationError("segment duration must be positive");
    TimeSlice slice;
    slice.duration = seg.duration;
    CouplingSettings constants;
    for (const auto& [edge, ramp] : seg.couplings) {
      if (edge.block < 0 || edge.block >= chain.block_count())
        throw ValidationError("schedule edge on a nonexistent block");
      if (ramp.is_constant()) {
        constants[edge] = ramp.amplitude;
      } else {
        constants[edge] = 0.0;  // validates tunability through the same path
        OperatorExpr xy;
        xy += pauli_pair(Axis::X, 4 * edge.block + edge.a, Axis::X, 4 * edge.block + edge.b);
        xy += pauli_pair(Axis::Y, 4 * edge.block + edge.a, Axis::Y, 4 * edge.block + edge.b);
        const double duration = seg.duration;
        RampSpec r = ramp;
        slice.ramps.emplace_back(realize_sparse(xy, chain.qubit_count()),
                                 [r, duration](double t) { return r.value_at(t, duration); });
      }
    }
    slice.h_fixed = realize_sparse(chain_expr(chain, constants), chain.qubit_count());
    slices.push_back(std::move(slice));
  }
  return slices;
}

EvolutionResult evolve_time_slices(Index dim, const std::vector<TimeSlice>& slices,
                                   const EvolveInput& input, const EvolveOptions& options) {
  const LeakageGauge gauge(options.leakage_projector);

  bool any_ramp = false;
  for (const auto& s : slices) any_ramp |= s.has_ramps();

  int total_steps = options.steps;
  if (any_ramp && total_steps <= 0) {
    double t_ramped = 0.0;
    double hmax = 0.0;
    for (const auto& s : slices)
      if (s.has_ramps()) {
        t_ramped += s.duration;
        hmax = std::max(hmax, slice_norm_estimate(s));
      }
    total_steps = static_cast<int>(std::ceil(50.0 * t_ramped * hmax));
    total_steps = std::max(total_steps, 100);
  }

  auto run = [&](int steps) {
    Ensemble e = make_ensemble(dim, input, options);
    double max_leak = 0.0;
    const std::vector<int> ramp_steps =
        any_ramp ? allocate_ramp_steps(slices, steps) : std::vector<int>{};
    const long counted = run_slices(e, slices, ramp_steps, options, gauge, &max_leak);
    return std::tuple<Ensemble, double, long>(std::move(e), max_leak, counted);
  };

  auto [ensemble, max_leak, counted_steps] = run(total_steps);

  EvolutionResult result;
  result.step_count = counted_steps;
  result.leakage = max_leak;

  if (any_ramp && options.step_diagnostics && total_steps >= 4 * 16) {
    auto [e_half, leak_half, n_half] = run(total_steps / 2);
    auto [e_quarter, leak_quarter, n_quarter] = run(total_steps / 4);
    (void)leak_half;
    (void)leak_quarter;
    (void)n_half;
    (void)n_quarter;
    const double err_fine = (ensemble.columns - e_half.columns).norm();
    const double err_coarse = (e_half.columns - e_quarter.columns).norm();
    result.max_step_error = err_fine;
    if (err_fine > err_coarse && err_fine > 1e-11)
      throw IntegrationError("step refinement error estimate is not decreasing");
  }

  double defect = 0.0;
  for (Index c = 0; c < ensemble.columns.cols(); ++c)
    defect = std::max(defect, std::abs(ensemble.columns.col(c).norm() - 1.0));
  result.unitarity_defect = defect;
  if (defect >= 1e-8)
    throw ContractViolation("evolution lost unitarity beyond 1e-8");

  for (size_t ti = 0; ti < ensemble.tracked.size(); ++ti) {
    TrackedPhase tp;
    tp.state = ensemble.tracked[ti];
    tp.total_phase = ensemble.phase[ti] - ensemble.phase_start[ti];
    tp.dynamical_phase = ensemble.dyn_phase[ti];
    tp.final_overlap = std::abs(tracked_amp(ensemble, ti));
    result.tracked.push_back(tp);
  }

  switch (input.kind) {
    case EvolveInput::Kind::Unitary:
      result.unitary = ensemble.columns;
      break;
    case EvolveInput::Kind::State:
      result.state = ensemble.columns.col(0);
      break;
    case EvolveInput::Kind::Columns:
      result.columns = ensemble.columns;
      result.column_indices = ensemble.column_ids;
      break;
  }
  return result;
}

EvolutionResult evolve_piecewise(const ChainSpec& chain, const PulseSchedule& schedule,
                                 const EvolveInput& input, const EvolveOptions& options) {
  if (schedule.has_ramps())
    throw ValidationError("evolve_piecewise: ramp segment passed to the piecewise evolver");
  const auto slices = schedule_slices(chain, schedule);
  if (slices.empty()) {
    // Empty schedule: identity.
    return evolve_time_slices(chain.dim(), {}, input, options);
  }
  return evolve_time_slices(chain.dim(), slices, input, options);
}

EvolutionResult evolve_ramped(const ChainSpec& chain, const PulseSchedule& schedule,
                              int steps, const EvolveInput& input,
                              const EvolveOptions& options) {
  if (steps < 100) throw ValidationError("evolve_ramped: need at least 100 steps");
  EvolveOptions opts = options;
  opts.steps = steps;
  return evolve_time_slices(chain.dim(), schedule_slices(chain, schedule), input, opts);
}

double dynamical_phase(const std::vector<double>& times, const std::vector<Vector>& states,
                       const std::function<SpMatrix(double)>& hamiltonian) {
  if (times.size() != states.size() || times.size() < 2)
    throw ValidationError("dynamical_phase: trajectory grid mismatch");
  for (size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw ValidationError("dynamical_phase: times must be strictly increasing");
  double phase = 0.0;
  double e_prev = std::real(states[0].dot(hamiltonian(times[0]) * states[0]));
  for (size_t k = 1; k < times.size(); ++k) {
    const double e = std::real(states[k].dot(hamiltonian(times[k]) * states[k]));
    phase -= 0.5 * (times[k] - times[k - 1]) * (e_prev + e);
    e_prev = e;
  }
  return phase;
}

double berry_phase_residual(const EvolutionResult& result, const PulseSchedule& schedule,
                            Index tracked_state) {
  if (schedule.segments.empty()) throw ValidationError("berry_phase_residual: empty schedule");
  // Cyclic check: the coupling settings at t=0 and t=t_f must agree.
  const Segment& first = schedule.segments.front();
  const Segment& last = schedule.segments.back();
  std::map<EdgeRef, double> start, end;
  for (const auto& [edge, ramp] : first.couplings) start[edge] = ramp.value_at(0.0, first.duration);
  for (const auto& [edge, ramp] : last.couplings)
    end[edge] = ramp.value_at(last.duration, last.duration);
  for (const auto& [edge, v] : start)
    if (std::abs(v - (end.count(edge) ? end.at(edge) : 0.0)) > 1e-12)
      throw ValidationError("berry_phase_residual: schedule is not cyclic");
  for (const auto& [edge, v] : end)
    if (std::abs(v - (start.count(edge) ? start.at(edge) : 0.0)) > 1e-12)
      throw ValidationError("berry_phase_residual: schedule is not cyclic");

  const TrackedPhase& tp = result.phase_of(tracked_state);
  return wrap_angle(tp.total_phase - tp.dynamical_phase);
}

double adiabaticity_margin(double J, double Jp, const RampSpec& ramp, double duration) {
  const double gap1 = std::abs(J - Jp);
  const double gap2 = std::abs(2.0 * J - Jp);
  if (gap1 == 0.0 || gap2 == 0.0)
    throw GapClosureError("adiabaticity_margin: spectral gap closed");
  const double slope = ramp.max_slope(duration);
  if (slope == 0.0) return std::numeric_limits<double>::infinity();
  const double gap = std::min(gap1 * gap1, gap2 * gap2);
  return gap / (slope / 8.0);
}

}  // namespace dfsblock
