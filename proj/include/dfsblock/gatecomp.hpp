#pragma once

// Compiles logical operations into pulse schedules. All gates act through
// the two tunable couplings of a block: edge (0,1) drives logical
// |0><1| + h.c. rotations, edge (1,2) drives the |1>/|2> sector used for
// phase gates, the ancilla mapping, and both controlled-phase constructions.

#include <map>
#include <utility>

#include "dfsblock/dynamics.hpp"

namespace dfsblock {

enum class GateKind { XRotation, ZRotation, ZUnitPower, Map1To2, CzPulsed, CzAdiabatic };

// Declarative gate request (CLI-facing). Angles are wrapped to (-pi, pi].
struct GateSpec {
  GateKind kind = GateKind::XRotation;
  int block = 0;  // first block of the pair for two-block gates
  double angle = 0.0;
  double J = 1.0;
  double Jp = 0.5;
  double mu = 1.0;
  double nu = 1.0;
  double epsilon = 1e-3;  // synthesis tolerance for ZRotation
  RampSpec ramp = RampSpec::sin2(0.2);
  double t_f = 200.0;

  static GateSpec make(GateKind kind, double raw_angle);
};

struct SynthesisResult {
  long long power = 1;       // number of unit applications
  double achieved = 0.0;     // power * theta reduced to [0, 2*pi)
  double error = 0.0;        // circle distance to the target
  long long evaluations = 0; // candidate angles examined
};

struct PhaseCoefficients {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
};

struct ZUnit {
  double theta = 0.0;  // exp(-i theta Z01) per application, up to global phase
  double t = 0.0;      // pulse duration
};

struct AdiabaticCzPlan {
  PulseSchedule schedule;  // map |1>->|2>, ramp on the neighbor, map back
  PulseSchedule ramp_only; // the ramp segment alone (phase-table measurements)
  double eta = 0.0;        // integral nu^2 / (J'-J)
  double kappa = 0.0;      // integral nu^2 / (J'-2J)
  double d = 0.0;          // (kappa - eta)/4
  double theta = 0.0;      // (1/4) integral J nu^2 / ((J'-2J)(J'-J))
  double margin = 0.0;     // adiabaticity margin of the ramp
};

// Single pulse on edge (0,1): K = mu for t chosen so the logical action is
// exp(-i lambda X01) exactly, with the accompanying global phase 2 J' t
// recorded in the metadata. lambda = 0 yields an empty schedule.
PulseSchedule compile_x_rotation(int block, double lambda, double mu, double J, double Jp);

// Timing and angle of one z unit: t = 2*pi/sqrt(sigma^2 + 4 nu^2),
// theta = pi*sigma/sqrt(sigma^2 + 4 nu^2), sigma = 2(J - J'). One pulse of
// K(1,2) = nu for time t acts on {|0>,|1>} as exp(-i theta Z01) up to a
// recorded global phase, with zero net transfer to |2>.
ZUnit z_unit(double J, double Jp, double nu);

// Smallest-found positive n with circle_distance(n*theta, lambda) < eps.
// Ascending exhaustive scan up to an internal band, then a deterministic
// continued-fraction walk. theta/pi must not be (numerically) rational with
// denominator <= 1000.
SynthesisResult synthesize_z_power(double lambda, double theta, double eps,
                                   long long power_cap = 1'000'000'000LL);

// n z units merged into one constant segment, n from synthesize_z_power.
PulseSchedule compile_z_rotation(int block, double lambda, double eps, double J,
                                 double Jp, double nu);

// Alternating K(1,2) pulses and idle waits realizing, up to a recorded
// global phase, the exchange |1> <-> |2> on the block (distance < 1e-6 in
// the sector, diagonal action on |0>). Euler-angle composition about the
// idle z axis and the pulsed axis tilted by arctan(2 nu / sigma).
PulseSchedule compile_map_1_to_2(int block, double J, double Jp, double nu);

// Case of strong pulses: [flip both blocks] [idle wait tau = d/J]
// [flip back], flip duration pi/(4|nu|). Below the ratio threshold a regime
// note is attached but the schedule is still emitted.
PulseSchedule compile_cz_pulsed(int block, double J, double Jp, double nu, double d_target,
                                double ratio_threshold = 50.0);

// Adiabatic construction: ancilla mapping on `block`, slow ramp of K(1,2)
// on block+1, mapping back. Predictions by numerical quadrature; the
// identity theta = (kappa - eta)/4 is asserted to 1e-12.
AdiabaticCzPlan compile_cz_adiabatic(int block, double J, double Jp, const RampSpec& ramp,
                                     double t_f, double nu_map, double min_margin = 10.0);

// Solves phi(m,n) = a + b z_m + c z_n + d z_m z_n with z = +1 for the
// smaller label of each pair. All four combinations must be present.
PhaseCoefficients fit_phase_coefficients(const std::map<std::pair<int, int>, double>& phases);

struct MakhlinInvariants {
  Complex g1;
  double g2 = 0.0;
};

// Local invariants of a two-qubit gate (magic-basis construction).
MakhlinInvariants makhlin_invariants(const Eigen::Matrix4cd& u);

// zz interaction angle of a gate in the controlled-phase local class,
// recovered from g1 = cos^2(2d); returns a value in [0, pi/4].
double zz_class_angle(const MakhlinInvariants& inv);

}  // namespace dfsblock
