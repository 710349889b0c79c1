#pragma once

#include <array>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace framechange {

namespace event {

// Nominal pi/2 pulse about the in-plane axis (cos phase, sin phase, 0). Its width is the
// program's tp. A nonzero deflection tags the pulse for the balanced (axis-tilt) error model.
struct HardPulse {
  double phase_deg = 0.0;
  double deflection_rad = 0.0;
  friend bool operator==(const HardPulse&, const HardPulse&) = default;
};

struct Delay {
  double duration_us = 0.0;
  friend bool operator==(const Delay&, const Delay&) = default;
};

// Zero-duration frame rotation about z.
struct VirtualZ {
  double angle_deg = 0.0;
  friend bool operator==(const VirtualZ&, const VirtualZ&) = default;
};

// Zero-duration error kick: rotation by angle_deg about the in-plane axis at phase_deg.
struct Transient {
  double phase_deg = 0.0;
  double angle_deg = 0.0;
  friend bool operator==(const Transient&, const Transient&) = default;
};

}  // namespace event

using Event = std::variant<event::HardPulse, event::Delay, event::VirtualZ, event::Transient>;

enum class Stage { Logical, Detailed, Experimental };

std::string_view stage_name(Stage stage);
Stage parse_stage(std::string_view text);  // throws InputError

struct PulseProgram {
  std::string name;
  std::vector<Event> events;
  double tau0_us = 0.0;
  double tp_us = 0.0;
  Stage stage = Stage::Logical;
  // Total z-rotation folded away by the compiler; the simulator applies Rz(frame) after each
  // cycle so that experimental and corrected detailed programs are directly comparable.
  double frame_deg = 0.0;

  friend bool operator==(const PulseProgram&, const PulseProgram&) = default;
};

// Canonical phases of the axis tokens.
inline constexpr double kPhaseX = 0.0;
inline constexpr double kPhaseY = 90.0;
inline constexpr double kPhaseMinusX = 180.0;
inline constexpr double kPhaseMinusY = 270.0;

inline constexpr double kMinExperimentalGapUs = 2.5;

int pulse_count(const PulseProgram& p);
// Sum of delays; pulse widths are absorbed into the printed delays.
double period_us(const PulseProgram& p);
std::vector<double> pulse_phases(const PulseProgram& p);

// Appends an event, merging a delay into a directly preceding delay.
void append_event(std::vector<Event>& events, const Event& e);

struct Wei16Params {
  double u = 0.0, v = 0.0, w = 0.0, a = 0.0, b = 0.0, c = 0.0;
  friend bool operator==(const Wei16Params&, const Wei16Params&) = default;
};

struct Wei16Delays {
  double tau1, tau2, tau3, tau1p, tau2p, tau3p;
  std::array<double, 6> as_array() const { return {tau1, tau2, tau3, tau1p, tau2p, tau3p}; }
};

// Throws ConstraintError when any delay is below tp (or negative).
Wei16Delays wei16_delays(const Wei16Params& params, double tau0_us, double tp_us = 0.0);

enum class SequenceName { Wei16, Angle12, Peng24, Mrev8 };

SequenceName parse_sequence_name(std::string_view text);  // throws InputError
std::string_view sequence_name(SequenceName name);

// Logical-stage program. Throws ConstraintError when a pulse would not fit in its delays.
PulseProgram build_sequence(SequenceName name, double tau0_us, double tp_us,
                            const Wei16Params& params = {});

// Time-reversal reflection x <-> y, -x <-> -y (phase -> 90 - phase), delays unchanged.
// Logical stage only.
PulseProgram reflect_for_reversal(const PulseProgram& p);

// Free-evolution times of each Delay event when every pulse takes tp/2 out of the delay on
// either side (cyclically across the program boundary). Returns one entry per event; zero for
// non-delay events. Throws ConstraintError when any free time would be negative.
std::vector<double> free_evolution_times(const PulseProgram& p, double tp_us);

// 1 degree phase grid, no frame events, every pulse-to-pulse gap (delay minus tp, including
// the wrap-around gap) at least 2.5 us. Throws ConstraintError.
void check_experimental_constraints(const PulseProgram& p);

// Text format:
//   SEQ <name> tau0=<us> tp=<us> [stage=<logical|detailed|experimental>] [frame=<deg>]
//   P(item, item, ...) ...
// item: duration (<us> | <k>*tau0) or axis (x | y | -x | -y | @<deg>), optionally followed by
// ~<rad> deflection, or Z(<deg>) / T(<phase deg>,<angle deg>). '#' starts a comment.
PulseProgram parse_program(std::string_view text);
std::string print_program(const PulseProgram& p);

PulseProgram read_program_file(const std::string& path);
void write_program_file(const std::string& path, const PulseProgram& p);

}  // namespace framechange
