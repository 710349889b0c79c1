#pragma once

#include <variant>

#include "framechange/linalg.hpp"
#include "framechange/pulseprog.hpp"
#include "framechange/spinsys.hpp"

namespace framechange {

namespace transient_model {

struct None {
  friend bool operator==(const None&, const None&) = default;
};

// Small rotation theta about the axis 90 degrees ahead of the pulse phase, applied at the
// rising edge (or, with trailing = true, at the falling edge).
struct LeadingEdge {
  double theta_deg = 0.0;
  bool trailing = false;
  friend bool operator==(const LeadingEdge&, const LeadingEdge&) = default;
};

// Rotation axis tilted toward z: exp(-i[(pi/2) n.sigma + eps sigma_z]/2).
struct Balanced {
  double epsilon_rad = 0.0;
  friend bool operator==(const Balanced&, const Balanced&) = default;
};

}  // namespace transient_model

using TransientModel =
    std::variant<transient_model::None, transient_model::LeadingEdge, transient_model::Balanced>;

inline constexpr double kMaxThetaFcDeg = 45.0;
inline constexpr double kMaxEpsilonFcRad = kPi / 4.0;

// Throws InputError outside the sanity bounds.
void validate(const TransientModel& model);

bool is_ideal(const TransientModel& model);

// Single-spin rotation R_phase(angle) = exp(-i (angle/2)(cos phase sigma_x + sin phase sigma_y)).
Mat2c phase_rotation(double phase_deg, double angle_rad);
Mat2c z_rotation(double angle_rad);

// Single-spin erroneous pi/2 pulse; the transient is the rightmost (earliest) factor.
Mat2c pulse_unitary_1q(double phase_deg, const TransientModel& model);
Mat2c balanced_pulse_1q(double phase_deg, double epsilon_rad);

// The same pulse applied to every spin of the register.
CMatrix pulse_unitary(double phase_deg, const TransientModel& model, const SpinRegister& reg);

// logical -> detailed. LeadingEdge adds a Transient event next to each pulse; Balanced tags
// pulses with their deflection; None only changes the stage.
PulseProgram inject_transients(const PulseProgram& p, const TransientModel& model);

// Inserts the virtual-z correction into a detailed program:
//   LeadingEdge:            Z(-theta) after each pulse (Z(+theta) before it for trailing),
//   Balanced:               Z(alpha/2) before and after each pulse.
PulseProgram insert_frame_change(const PulseProgram& p, const TransientModel& model);

// Frame-change angle alpha (radians) minimizing the single-pulse infidelity of
// Rz(alpha/2) U_eps Rz(alpha/2) against the ideal pulse. Golden section, tolerance 1e-6.
double balanced_frame_change_angle(double epsilon_rad);

// 1 - |Tr(V^dagger U)/2|^2 for single-spin unitaries.
double single_spin_infidelity(const Mat2c& u, const Mat2c& v);

// Round to the nearest integer degree (ties away from zero), wrapped into [0, 360).
double quantize_phase_deg(double phase_deg);

// detailed -> experimental: folds every VirtualZ into the phases of later pulses
// (phase - accumulated angle), drops transient events and deflection tags, and records the
// total folded angle in frame_deg. Phases are quantized unless quantize is false.
PulseProgram fold_virtual_z(const PulseProgram& p, bool quantize = true);

}  // namespace framechange
