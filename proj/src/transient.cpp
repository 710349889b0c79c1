#include "framechange/transient.hpp"

#include <cmath>
#include <string>

#include "framechange/error.hpp"

namespace framechange {

namespace {

double wrap_degrees(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  return r >= 360.0 ? 0.0 : r;
}

void require_stage(const PulseProgram& p, Stage expected, const char* pass) {
  if (p.stage != expected) {
    throw StageError(std::string(pass) + " expects a " + std::string(stage_name(expected)) +
                     "-stage program, got " + std::string(stage_name(p.stage)));
  }
}

}  // namespace

void validate(const TransientModel& model) {
  if (const auto* le = std::get_if<transient_model::LeadingEdge>(&model)) {
    if (!std::isfinite(le->theta_deg) || std::abs(le->theta_deg) > kMaxThetaFcDeg) {
      throw InputError("theta_fc must be within +-45 degrees");
    }
  } else if (const auto* bal = std::get_if<transient_model::Balanced>(&model)) {
    if (!std::isfinite(bal->epsilon_rad) || std::abs(bal->epsilon_rad) > kMaxEpsilonFcRad) {
      throw InputError("epsilon_fc must be within +-pi/4 rad");
    }
  }
}

bool is_ideal(const TransientModel& model) {
  if (std::holds_alternative<transient_model::None>(model)) return true;
  if (const auto* le = std::get_if<transient_model::LeadingEdge>(&model)) {
    return le->theta_deg == 0.0;
  }
  return std::get<transient_model::Balanced>(model).epsilon_rad == 0.0;
}

Mat2c phase_rotation(double phase_deg, double angle_rad) {
  const double phi = deg_to_rad(phase_deg);
  return su2_rotation(Vec3(std::cos(phi), std::sin(phi), 0.0), angle_rad);
}

Mat2c z_rotation(double angle_rad) { return su2_rotation(Vec3::UnitZ(), angle_rad); }

Mat2c balanced_pulse_1q(double phase_deg, double epsilon_rad) {
  const double phi = deg_to_rad(phase_deg);
  const Vec3 generator(kPi / 2.0 * std::cos(phi), kPi / 2.0 * std::sin(phi), epsilon_rad);
  return su2_rotation(generator, generator.norm());
}

Mat2c pulse_unitary_1q(double phase_deg, const TransientModel& model) {
  return std::visit(
      [&](const auto& m) -> Mat2c {
        using T = std::decay_t<decltype(m)>;
        const Mat2c ideal = phase_rotation(phase_deg, kPi / 2.0);
        if constexpr (std::is_same_v<T, transient_model::None>) {
          return ideal;
        } else if constexpr (std::is_same_v<T, transient_model::LeadingEdge>) {
          const Mat2c kick = phase_rotation(phase_deg + 90.0, deg_to_rad(m.theta_deg));
          return m.trailing ? Mat2c(kick * ideal) : Mat2c(ideal * kick);
        } else {
          return balanced_pulse_1q(phase_deg, m.epsilon_rad);
        }
      },
      model);
}

CMatrix pulse_unitary(double phase_deg, const TransientModel& model, const SpinRegister& reg) {
  return tensor_power(pulse_unitary_1q(phase_deg, model), reg.n_spins());
}

PulseProgram inject_transients(const PulseProgram& p, const TransientModel& model) {
  require_stage(p, Stage::Logical, "inject_transients");
  validate(model);
  PulseProgram out = p;
  out.stage = Stage::Detailed;
  out.events.clear();
  for (const auto& e : p.events) {
    const auto* hp = std::get_if<event::HardPulse>(&e);
    if (!hp) {
      out.events.push_back(e);
      continue;
    }
    if (const auto* le = std::get_if<transient_model::LeadingEdge>(&model)) {
      const event::Transient kick{wrap_degrees(hp->phase_deg + 90.0), le->theta_deg};
      if (le->trailing) {
        out.events.push_back(e);
        out.events.push_back(kick);
      } else {
        out.events.push_back(kick);
        out.events.push_back(e);
      }
    } else if (const auto* bal = std::get_if<transient_model::Balanced>(&model)) {
      out.events.push_back(event::HardPulse{hp->phase_deg, bal->epsilon_rad});
    } else {
      out.events.push_back(e);
    }
  }
  return out;
}

PulseProgram insert_frame_change(const PulseProgram& p, const TransientModel& model) {
  require_stage(p, Stage::Detailed, "insert_frame_change");
  validate(model);
  double before = 0.0;
  double after = 0.0;
  bool use_before = false;
  if (const auto* le = std::get_if<transient_model::LeadingEdge>(&model)) {
    if (le->trailing) {
      before = le->theta_deg;
      use_before = true;
    } else {
      after = -le->theta_deg;
    }
  } else if (const auto* bal = std::get_if<transient_model::Balanced>(&model)) {
    const double half = rad_to_deg(balanced_frame_change_angle(bal->epsilon_rad)) / 2.0;
    before = after = half;
    use_before = true;
  }
  const bool use_after = !use_before || std::holds_alternative<transient_model::Balanced>(model);

  PulseProgram out = p;
  out.events.clear();
  for (const auto& e : p.events) {
    const bool pulse = std::holds_alternative<event::HardPulse>(e);
    if (pulse && use_before) out.events.push_back(event::VirtualZ{before});
    out.events.push_back(e);
    if (pulse && use_after) out.events.push_back(event::VirtualZ{after});
  }
  return out;
}

double single_spin_infidelity(const Mat2c& u, const Mat2c& v) {
  const double overlap = std::abs((v.adjoint() * u).trace()) / 2.0;
  return 1.0 - overlap * overlap;
}

double balanced_frame_change_angle(double epsilon_rad) {
  if (epsilon_rad == 0.0) return 0.0;
  const Mat2c target = phase_rotation(0.0, kPi / 2.0);
  const Mat2c pulse = balanced_pulse_1q(0.0, epsilon_rad);
  auto cost = [&](double alpha) {
    const Mat2c half = z_rotation(alpha / 2.0);
    return single_spin_infidelity(half * pulse * half, target);
  };
  constexpr double kTolerance = 1e-6;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = -2.0 * std::abs(epsilon_rad) - 1e-2;
  double hi = 2.0 * std::abs(epsilon_rad) + 1e-2;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = cost(x1);
  double f2 = cost(x2);
  while (hi - lo > kTolerance) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = cost(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = cost(x2);
    }
  }
  return (lo + hi) / 2.0;
}

double quantize_phase_deg(double phase_deg) {
  // std::round rounds halfway cases away from zero.
  return wrap_degrees(std::round(phase_deg));
}

PulseProgram fold_virtual_z(const PulseProgram& p, bool quantize) {
  require_stage(p, Stage::Detailed, "fold_virtual_z");
  PulseProgram out = p;
  out.stage = Stage::Experimental;
  out.events.clear();
  double accumulated = 0.0;
  for (const auto& e : p.events) {
    if (const auto* z = std::get_if<event::VirtualZ>(&e)) {
      accumulated += z->angle_deg;
    } else if (const auto* hp = std::get_if<event::HardPulse>(&e)) {
      const double shifted = hp->phase_deg - accumulated;
      out.events.push_back(
          event::HardPulse{quantize ? quantize_phase_deg(shifted) : wrap_degrees(shifted), 0.0});
    } else if (std::holds_alternative<event::Delay>(e)) {
      append_event(out.events, e);
    }
  }
  out.frame_deg = p.frame_deg + accumulated;
  return out;
}

}  // namespace framechange
