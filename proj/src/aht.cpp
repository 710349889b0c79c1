#include "framechange/aht.hpp"

#include <cmath>

#include "framechange/error.hpp"

namespace framechange {

namespace {

Vec3 in_plane_axis(double phase_deg) {
  const double phi = deg_to_rad(phase_deg);
  return Vec3(std::cos(phi), std::sin(phi), 0.0);
}

Mat3 pulse_rotation(const event::HardPulse& hp) {
  const Vec3 generator = (kPi / 2.0) * in_plane_axis(hp.phase_deg) + hp.deflection_rad * Vec3::UnitZ();
  return so3_rotation(generator, generator.norm());
}

}  // namespace

Mat3 secular_dipolar_coefficients() { return Vec3(-1.0, -1.0, 2.0).asDiagonal(); }

std::vector<ToggleFrame> toggling_frames(const PulseProgram& p) {
  std::vector<ToggleFrame> frames;
  Mat3 r = Mat3::Identity();
  double dwell = 0.0;
  for (const auto& e : p.events) {
    if (const auto* d = std::get_if<event::Delay>(&e)) {
      dwell += d->duration_us;
    } else if (const auto* hp = std::get_if<event::HardPulse>(&e)) {
      frames.push_back({r, dwell});
      dwell = 0.0;
      r = pulse_rotation(*hp) * r;
    } else if (const auto* z = std::get_if<event::VirtualZ>(&e)) {
      r = so3_rotation(Vec3::UnitZ(), deg_to_rad(z->angle_deg)) * r;
    } else if (const auto* t = std::get_if<event::Transient>(&e)) {
      r = so3_rotation(in_plane_axis(t->phase_deg), deg_to_rad(t->angle_deg)) * r;
    }
  }
  frames.push_back({r, dwell});
  return frames;
}

AverageHamiltonian average_hamiltonian(const PulseProgram& p) {
  const auto frames = toggling_frames(p);
  const Mat3 az = secular_dipolar_coefficients();
  AverageHamiltonian out;
  out.period_us = period_us(p);
  out.final_frame = frames.back().rotation;
  if (out.period_us <= 0.0) {
    // No free evolution: report the bare Hamiltonian's coefficients.
    out.a = az;
    out.b = Vec3::UnitZ();
    return out;
  }
  for (const auto& f : frames) {
    if (f.dwell_us == 0.0) continue;
    const double weight = f.dwell_us / out.period_us;
    out.a += weight * f.rotation.transpose() * az * f.rotation;
    out.b += weight * f.rotation.transpose() * Vec3::UnitZ();
  }
  out.a = 0.5 * (out.a + out.a.transpose());
  return out;
}

Wei16Params solve_wei16_for_dq(double u_target, double tau0_us, double tp_us) {
  if (!std::isfinite(u_target)) throw InputError("u must be finite");
  Mat3 m;
  m << 1.0, 0.0, -1.0,
      -1.0, 1.0, 0.0,
      0.0, -1.0, 1.0;
  const Vec3 rhs(u_target, -u_target, 0.0);
  const Vec3 uvw = m.completeOrthogonalDecomposition().solve(rhs);
  if ((m * uvw - rhs).cwiseAbs().maxCoeff() > 1e-12) {
    throw NumericalError("Wei16 parameter solve did not reproduce the target");
  }
  Wei16Params params;
  params.u = uvw(0);
  params.v = uvw(1);
  params.w = uvw(2);
  wei16_delays(params, tau0_us, tp_us);
  return params;
}

}  // namespace framechange
