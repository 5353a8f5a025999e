#include "dfsblock/gatecomp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dfsblock {

namespace {

using M2 = Eigen::Matrix2cd;

double positive_mod(double x, double period) {
  double m = std::fmod(x, period);
  if (m < 0.0) m += period;
  return m;
}

// ---------------------------------------------------------------------------
// Exact 2x2 propagators of the {|1>,|2>} sector of one block:
//   idle   h = -2J I + sigma Z,          sigma = 2(J - J')
//   pulsed h = -2J I + sigma Z + 2 nu X
// ---------------------------------------------------------------------------

M2 sector_wait(double J, double sigma, double t) {
  M2 u = M2::Zero();
  const Complex global = std::exp(Complex{0.0, 2.0 * J * t});
  u(0, 0) = global * std::exp(Complex{0.0, -sigma * t});
  u(1, 1) = global * std::exp(Complex{0.0, sigma * t});
  return u;
}

M2 sector_pulse(double J, double sigma, double nu, double t) {
  const double omega = std::hypot(sigma, 2.0 * nu);
  const Complex global = std::exp(Complex{0.0, 2.0 * J * t});
  const double co = std::cos(omega * t);
  const double si = (omega == 0.0) ? 0.0 : std::sin(omega * t) / omega;
  M2 u;
  u(0, 0) = global * (co - kI * si * sigma);
  u(0, 1) = global * (-kI * si * 2.0 * nu);
  u(1, 0) = global * (-kI * si * 2.0 * nu);
  u(1, 1) = global * (co + kI * si * sigma);
  return u;
}

// Builder that appends segments while maintaining the honest sector product.
struct SectorBuilder {
  int block;
  double J, Jp, sigma, nu, omega;
  PulseSchedule schedule;
  M2 product = M2::Identity();
  double total_time = 0.0;

  SectorBuilder(int blk, double j, double jp, double n)
      : block(blk), J(j), Jp(jp), sigma(2.0 * (j - jp)), nu(n),
        omega(std::hypot(sigma, 2.0 * n)) {}

  void wait_angle(double delta) {
    // exp(-i sigma t Z) = Rz(2 sigma t); realize delta modulo 2*pi (the
    // possible global sign is absorbed by the recorded phases).
    const double angle = positive_mod(sigma > 0.0 ? delta : -delta, 2.0 * kPi);
    const double t = angle / (2.0 * std::abs(sigma));
    wait_time(t);
  }

  void wait_time(double t) {
    if (t <= 0.0) return;
    Segment seg;
    seg.duration = t;
    schedule.segments.push_back(seg);
    product = sector_wait(J, sigma, t) * product;
    total_time += t;
  }

  void pulse_angle(double beta) {
    // exp(-i (sigma Z + 2 nu X) t) rotates by 2*omega*t about the tilted axis.
    const double angle = positive_mod(beta, 2.0 * kPi);
    const double t = angle / (2.0 * omega);
    pulse_time(t);
  }

  void pulse_time(double t) {
    if (t <= 0.0) return;
    Segment seg;
    seg.duration = t;
    seg.couplings[EdgeRef{block, 1, 2}] = RampSpec::constant(nu);
    schedule.segments.push_back(seg);
    product = sector_pulse(J, sigma, nu, t) * product;
    total_time += t;
  }
};

bool near_rational(double x, long long max_denominator, double tol) {
  // Continued-fraction convergents of x; true if one with a small
  // denominator approximates x to within tol.
  double a = x;
  long long p0 = 1, q0 = 0, p1 = static_cast<long long>(std::floor(a)), q1 = 1;
  if (std::abs(x - static_cast<double>(p1)) < tol) return true;
  for (int iter = 0; iter < 64; ++iter) {
    const double frac = a - std::floor(a);
    if (frac < 1e-15) break;
    a = 1.0 / frac;
    const long long digit = static_cast<long long>(std::floor(a));
    const long long p2 = digit * p1 + p0;
    const long long q2 = digit * q1 + q0;
    if (q2 > max_denominator || q2 <= 0) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    if (std::abs(x - static_cast<double>(p1) / static_cast<double>(q1)) < tol) return true;
  }
  return false;
}

std::vector<long long> convergent_denominators(long double alpha, long long cap) {
  std::vector<long long> qs;
  long double a = alpha;
  long long q0 = 0, q1 = 1;
  for (int iter = 0; iter < 96; ++iter) {
    const long double frac = a - std::floor(a);
    if (frac < 1e-18L) break;
    a = 1.0L / frac;
    const long long digit = static_cast<long long>(std::floor(a));
    if (digit <= 0) break;
    if (q1 > (cap - q0) / std::max<long long>(digit, 1)) break;  // overflow / cap guard
    const long long q2 = digit * q1 + q0;
    q0 = q1;
    q1 = q2;
    qs.push_back(q2);
    if (q2 > cap) break;
  }
  return qs;
}

}  // namespace

GateSpec GateSpec::make(GateKind kind, double raw_angle) {
  GateSpec spec;
  spec.kind = kind;
  spec.angle = wrap_angle(raw_angle);
  return spec;
}

PulseSchedule compile_x_rotation(int block, double lambda, double mu, double J, double Jp) {
  if (mu == 0.0) throw ValidationError("compile_x_rotation: mu must be nonzero");
  PulseSchedule schedule;
  const double wrapped = wrap_angle(lambda);
  if (wrapped == 0.0) return schedule;
  // One pulse: exp(-i t (-2J' + 2 mu X01)) on the logical pair. Pick the
  // smallest t >= 0 with 2 mu t = lambda (mod 2*pi).
  const double angle = positive_mod(mu > 0.0 ? wrapped : -wrapped, 2.0 * kPi);
  const double t = angle / (2.0 * std::abs(mu));
  Segment seg;
  seg.duration = t;
  seg.couplings[EdgeRef{block, 0, 1}] = RampSpec::constant(mu);
  schedule.segments.push_back(seg);
  schedule.metadata["global_phase"] = 2.0 * Jp * t;          // phase of the logical pair
  schedule.metadata["ancilla_phase"] = -(2.0 * Jp - 4.0 * J) * t;  // phase picked up by |2>
  schedule.metadata["lambda"] = wrapped;
  return schedule;
}

ZUnit z_unit(double J, double Jp, double nu) {
  const double sigma = 2.0 * (J - Jp);
  if (sigma == 0.0 && nu == 0.0)
    throw ValidationError("z_unit: sigma and nu cannot both vanish");
  const double omega = std::hypot(sigma, 2.0 * nu);
  return ZUnit{kPi * sigma / omega, 2.0 * kPi / omega};
}

SynthesisResult synthesize_z_power(double lambda, double theta, double eps,
                                   long long power_cap) {
  if (!(eps > 0.0)) throw ValidationError("synthesize_z_power: eps must be positive");
  if (near_rational(theta / kPi, 1000, 1e-12))
    throw SynthesisDegeneracyError(
        "synthesize_z_power: theta/pi is rational within tolerance, powers cannot be dense");

  const long double two_pi = 2.0L * static_cast<long double>(kPi);
  const long double thetaL = static_cast<long double>(theta);
  const long double lambdaL = static_cast<long double>(lambda);
  long long evaluations = 0;

  auto signed_error = [&](long long n) {
    // n*theta - lambda wrapped to (-pi, pi], in long double.
    long double x = std::fmodl(static_cast<long double>(n) * thetaL - lambdaL, two_pi);
    if (x > static_cast<long double>(kPi)) x -= two_pi;
    if (x <= -static_cast<long double>(kPi)) x += two_pi;
    ++evaluations;
    return x;
  };
  auto make_result = [&](long long n) {
    SynthesisResult r;
    r.power = n;
    r.error = std::abs(static_cast<double>(signed_error(n)));
    r.achieved = static_cast<double>(std::fmodl(static_cast<long double>(n) * thetaL, two_pi));
    if (r.achieved < 0.0) r.achieved += 2.0 * kPi;
    r.evaluations = evaluations;
    return r;
  };

  // Ascending exhaustive band: returns the smallest solution when one exists
  // here, which also makes the returned power monotone in 1/eps.
  const long long band = std::min<long long>(power_cap, 2'000'000);
  long long best_n = 1;
  long double best_abs = std::abs(signed_error(1));
  if (best_abs < eps) return make_result(1);
  long double x = std::fmodl(thetaL - lambdaL, two_pi);
  for (long long n = 2; n <= band; ++n) {
    x += thetaL;
    if (x > static_cast<long double>(kPi)) x -= two_pi;
    // x tracks the signed error incrementally; |drift| stays far below eps.
    const long double abs_err = std::abs(x);
    ++evaluations;
    if (abs_err < best_abs) {
      best_abs = abs_err;
      best_n = n;
    }
    if (abs_err < eps) {
      // Confirm with a direct evaluation before returning.
      if (std::abs(signed_error(n)) < eps) return make_result(n);
    }
  }

  // Deterministic continued-fraction walk from the band optimum: each step
  // adds one convergent denominator of theta/(2*pi), chosen to shrink the
  // signed error. The walk is independent of eps, so smaller tolerances only
  // continue it further.
  long double alpha = std::fmodl(thetaL / two_pi, 1.0L);
  if (alpha < 0.0L) alpha += 1.0L;
  const auto qs = convergent_denominators(alpha, power_cap);
  long long n = best_n;
  long double err = signed_error(n);
  for (int round = 0; round < 512; ++round) {
    if (std::abs(err) < eps) return make_result(n);
    bool moved = false;
    for (auto it = qs.rbegin(); it != qs.rend(); ++it) {
      const long long q = *it;
      if (q > power_cap - n) continue;
      const long double e2 = signed_error(n + q);
      if (std::abs(e2) < std::abs(err) * (1.0L - 1e-9L)) {
        n += q;
        err = e2;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (std::abs(err) < eps) return make_result(n);
  throw CapacityError("synthesize_z_power: tolerance unreachable within the power cap");
}

PulseSchedule compile_z_rotation(int block, double lambda, double eps, double J,
                                 double Jp, double nu) {
  const ZUnit unit = z_unit(J, Jp, nu);
  const SynthesisResult synth = synthesize_z_power(lambda, unit.theta, eps);
  // n identical constant segments merge into one of n times the duration.
  PulseSchedule schedule;
  Segment seg;
  seg.duration = unit.t * static_cast<double>(synth.power);
  seg.couplings[EdgeRef{block, 1, 2}] = RampSpec::constant(nu);
  schedule.segments.push_back(seg);
  schedule.metadata["power"] = static_cast<double>(synth.power);
  schedule.metadata["theta"] = unit.theta;
  schedule.metadata["unit_time"] = unit.t;
  schedule.metadata["synthesis_error"] = synth.error;
  return schedule;
}

PulseSchedule compile_map_1_to_2(int block, double J, double Jp, double nu) {
  const double sigma = 2.0 * (J - Jp);
  if (nu == 0.0 || sigma == 0.0)
    throw ModelError("compile_map_1_to_2: control axes are collinear (nu or sigma is zero)");

  SectorBuilder b(block, J, Jp, nu);
  const double phi = std::atan2(2.0 * nu, sigma);  // pulse-axis tilt from z
  const double s = std::sin(phi);
  const double c = std::cos(phi);

  if (s * s >= 0.5) {
    // Symmetric sandwich pulse(beta) wait(delta) pulse(beta); the transfer
    // is complete exactly when cos(beta) = -cot^2(phi).
    const double cosbeta = std::clamp(-(c * c) / (s * s), -1.0, 1.0);
    const double beta = std::acos(cosbeta);
    const Complex a_coef = Complex{std::cos(beta), 0.0} - kI * (c * std::sin(beta));
    const Complex b_coef =
        Complex{-c * std::sin(beta), 0.0} - kI * (s * s + std::cos(beta) * c * c);
    // tan(delta/2) = -A/B, real by construction.
    const Complex ratio = -a_coef / b_coef;
    const double delta = 2.0 * std::atan(std::real(ratio));
    b.pulse_angle(beta);
    b.wait_angle(delta);
    b.pulse_angle(beta);
  } else {
    // Small tilt: m blocks of wait(pi) pulse(pi), each advancing the polar
    // angle by 2*phi_eff, then one oriented remainder pulse.
    const double phi_eff = std::asin(std::abs(s));
    const int m = static_cast<int>(std::floor(kPi / (2.0 * phi_eff)));
    for (int i = 0; i < m; ++i) {
      b.wait_angle(kPi);
      b.pulse_angle(kPi);
    }
    const double r = kPi - 2.0 * m * phi_eff;
    if (r > 1e-12) {
      const double beta_r =
          2.0 * std::asin(std::clamp(std::sin(r / 2.0) / std::abs(s), 0.0, 1.0));
      const Complex w1 = b.product(0, 0);
      const Complex w2 = b.product(1, 0);
      const Complex p = Complex{std::cos(beta_r / 2.0), 0.0} - kI * (std::sin(beta_r / 2.0) * c);
      const double q = std::sin(beta_r / 2.0) * s;
      // Orient the remainder so the |1> amplitude is annihilated:
      // p w1 e^{-ia/2} - i q w2 e^{ia/2} = 0.
      const Complex target = p * w1 / (kI * q * w2);
      const double a = std::arg(target);
      b.wait_angle(a);
      b.pulse_angle(beta_r);
    }
  }

  // Closing wait makes the two anti-diagonal entries equal, so the sector
  // action is exactly exp(i alpha) X.
  {
    const Complex v01 = b.product(0, 1);
    const Complex v10 = b.product(1, 0);
    const double gamma = std::arg(v01 / v10);
    b.wait_angle(gamma);
  }

  const M2& u = b.product;
  const double residual = std::abs(u(0, 0)) + std::abs(u(1, 1)) + std::abs(u(0, 1) - u(1, 0));
  if (residual > 1e-9)
    throw ModelError("compile_map_1_to_2: pulse composition failed to close");

  b.schedule.metadata["sector_phase"] = std::arg(u(1, 0));        // alpha of e^{i alpha} X
  b.schedule.metadata["idle_phase"] = 2.0 * Jp * b.total_time;    // phase of |0>
  b.schedule.metadata["composition_residual"] = residual;
  b.schedule.metadata["total_time"] = b.total_time;
  return b.schedule;
}

PulseSchedule compile_cz_pulsed(int block, double J, double Jp, double nu, double d_target,
                                double ratio_threshold) {
  if (nu == 0.0) throw ValidationError("compile_cz_pulsed: nu must be nonzero");
  if (J == 0.0) throw ValidationError("compile_cz_pulsed: J must be nonzero");
  PulseSchedule schedule;
  const double ratio = std::abs(nu) / std::max(std::abs(J), std::abs(Jp));
  if (ratio < ratio_threshold)
    schedule.notes.push_back("strong-pulse regime not satisfied: |nu| / max(|J|,|J'|) = " +
                             std::to_string(ratio));

  const double t_flip = kPi / (4.0 * std::abs(nu));
  Segment flip;
  flip.duration = t_flip;
  flip.couplings[EdgeRef{block, 1, 2}] = RampSpec::constant(nu);
  flip.couplings[EdgeRef{block + 1, 1, 2}] = RampSpec::constant(nu);

  const double tau = d_target / J;
  if (tau < 0.0) throw ValidationError("compile_cz_pulsed: target and J have opposite signs");

  schedule.segments.push_back(flip);
  if (tau > 0.0) {
    Segment wait;
    wait.duration = tau;
    schedule.segments.push_back(wait);
  }
  schedule.segments.push_back(flip);

  // Predicted logical phases in the strong-pulse limit. A block holding
  // logical 0 stays in |0> and collects 2 J' t per flip; a block holding
  // logical 1 is transferred |1> -> |2> -> |1> with amplitude (-i e^{2iJt})^2.
  // Wait phases come from the effective (0/2, 0/2) energies.
  const double flips_on_0 = 2.0 * (2.0 * Jp * t_flip);
  const double flips_on_1 = kPi + 4.0 * J * t_flip;
  std::map<std::pair<int, int>, double> predicted;
  predicted[{0, 0}] = 2.0 * flips_on_0 + 4.0 * Jp * tau;
  predicted[{0, 1}] = flips_on_0 + flips_on_1 + 4.0 * J * tau;
  predicted[{1, 0}] = predicted[{0, 1}];
  predicted[{1, 1}] = 2.0 * flips_on_1 + (12.0 * J - 4.0 * Jp) * tau;
  const PhaseCoefficients pred = fit_phase_coefficients(predicted);
  schedule.metadata["a"] = pred.a;
  schedule.metadata["b"] = pred.b;
  schedule.metadata["c"] = pred.c;
  schedule.metadata["d"] = pred.d;
  schedule.metadata["tau"] = tau;
  schedule.metadata["flip_time"] = t_flip;
  schedule.metadata["ratio"] = ratio;
  return schedule;
}

AdiabaticCzPlan compile_cz_adiabatic(int block, double J, double Jp, const RampSpec& ramp,
                                     double t_f, double nu_map, double min_margin) {
  if (Jp == J || Jp == 2.0 * J)
    throw GapClosureError("compile_cz_adiabatic: J' = J or J' = 2J closes a gap");
  if (!(t_f > 0.0)) throw ValidationError("compile_cz_adiabatic: t_f must be positive");
  if (std::abs(ramp.value_at(0.0, t_f)) > 1e-12 ||
      std::abs(ramp.value_at(t_f, t_f)) > 1e-12)
    throw ValidationError("compile_cz_adiabatic: ramp must start and end at zero");

  AdiabaticCzPlan plan;
  plan.margin = adiabaticity_margin(J, Jp, ramp, t_f);
  if (plan.margin < min_margin) {
    std::ostringstream os;
    os << "compile_cz_adiabatic: adiabaticity margin " << plan.margin
       << " below the minimum " << min_margin;
    throw ModelError(os.str());
  }

  // Composite Simpson quadrature of integral nu(t)^2 dt.
  const int intervals = 8192;
  const double h = t_f / intervals;
  double integral = 0.0;
  for (int k = 0; k <= intervals; ++k) {
    const double v = ramp.value_at(k * h, t_f);
    const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    integral += w * v * v;
  }
  integral *= h / 3.0;

  plan.eta = integral / (Jp - J);
  plan.kappa = integral / (Jp - 2.0 * J);
  plan.d = (plan.kappa - plan.eta) / 4.0;
  plan.theta = 0.25 * J * integral / ((Jp - 2.0 * J) * (Jp - J));
  if (std::abs(plan.theta - plan.d) > 1e-12)
    throw ContractViolation("compile_cz_adiabatic: quadrature identity theta = (kappa-eta)/4 failed");

  Segment ramp_seg;
  ramp_seg.duration = t_f;
  ramp_seg.couplings[EdgeRef{block + 1, 1, 2}] = ramp;
  plan.ramp_only.segments.push_back(ramp_seg);

  const PulseSchedule map12 = compile_map_1_to_2(block, J, Jp, nu_map);
  plan.schedule.segments = map12.segments;
  plan.schedule.segments.push_back(ramp_seg);
  for (const auto& seg : map12.segments) plan.schedule.segments.push_back(seg);

  plan.schedule.metadata["eta"] = plan.eta;
  plan.schedule.metadata["kappa"] = plan.kappa;
  plan.schedule.metadata["d"] = plan.d;
  plan.schedule.metadata["theta"] = plan.theta;
  plan.schedule.metadata["margin"] = plan.margin;
  plan.schedule.metadata["map_sector_phase"] = map12.metadata.at("sector_phase");
  plan.schedule.metadata["map_idle_phase"] = map12.metadata.at("idle_phase");
  plan.ramp_only.metadata = plan.schedule.metadata;
  return plan;
}

PhaseCoefficients fit_phase_coefficients(
    const std::map<std::pair<int, int>, double>& phases) {
  if (phases.size() != 4)
    throw ValidationError("fit_phase_coefficients: need exactly the four combinations");
  std::vector<int> first, second;
  for (const auto& [key, value] : phases) {
    (void)value;
    if (std::find(first.begin(), first.end(), key.first) == first.end())
      first.push_back(key.first);
    if (std::find(second.begin(), second.end(), key.second) == second.end())
      second.push_back(key.second);
  }
  if (first.size() != 2 || second.size() != 2)
    throw ValidationError("fit_phase_coefficients: need a full 2x2 label grid");
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());

  auto phi = [&](int i, int j) {
    const auto it = phases.find({first[i], second[j]});
    if (it == phases.end())
      throw ValidationError("fit_phase_coefficients: missing combination");
    return it->second;
  };
  // z = +1 for the smaller label (index 0), -1 for the larger.
  PhaseCoefficients out;
  out.a = (phi(0, 0) + phi(0, 1) + phi(1, 0) + phi(1, 1)) / 4.0;
  out.b = (phi(0, 0) + phi(0, 1) - phi(1, 0) - phi(1, 1)) / 4.0;
  out.c = (phi(0, 0) - phi(0, 1) + phi(1, 0) - phi(1, 1)) / 4.0;
  out.d = (phi(0, 0) - phi(0, 1) - phi(1, 0) + phi(1, 1)) / 4.0;
  return out;
}

MakhlinInvariants makhlin_invariants(const Eigen::Matrix4cd& u) {
  Eigen::Matrix4cd q;
  const Complex i = kI;
  const double r = 1.0 / std::sqrt(2.0);
  q << r, 0, 0, r * i,
       0, r * i, r, 0,
       0, r * i, -r, 0,
       r, 0, 0, -r * i;
  const Eigen::Matrix4cd m_basis = q.adjoint() * u * q;
  const Eigen::Matrix4cd m = m_basis.transpose() * m_basis;
  const Complex tr = m.trace();
  const Complex tr2 = (m * m).trace();
  const Complex det = u.determinant();
  MakhlinInvariants inv;
  inv.g1 = tr * tr / (16.0 * det);
  inv.g2 = std::real((tr * tr - tr2) / (4.0 * det));
  return inv;
}

double zz_class_angle(const MakhlinInvariants& inv) {
  const double g1 = std::clamp(std::real(inv.g1), 0.0, 1.0);
  return 0.5 * std::acos(std::clamp(std::sqrt(g1), 0.0, 1.0));
}

}  // namespace dfsblock
