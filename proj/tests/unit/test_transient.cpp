#include <cmath>
#include <vector>

#include "doctest.h"
#include "framechange/dynamics.hpp"
#include "framechange/error.hpp"
#include "framechange/transient.hpp"
#include "oracle.hpp"

using namespace framechange;

namespace {

// exp(-i (angle/2) n.sigma) from the Taylor-series oracle.
Mat2c rotation_oracle(const Vec3& n, double angle) {
  const CMatrix g = n.x() * oracle::pauli('x') + n.y() * oracle::pauli('y') +
                    n.z() * oracle::pauli('z');
  return oracle::expm(Complex(0.0, -angle / 2.0) * g);
}

Vec3 in_plane(double deg) { return Vec3(std::cos(deg_to_rad(deg)), std::sin(deg_to_rad(deg)), 0.0); }

Vec3 bloch_image(const Mat2c& u, const Vec3& v) {
  const CMatrix rho = v.x() * oracle::pauli('x') + v.y() * oracle::pauli('y') + v.z() * oracle::pauli('z');
  const CMatrix out = u * rho * u.adjoint();
  return Vec3((out * oracle::pauli('x')).trace().real() / 2.0,
              (out * oracle::pauli('y')).trace().real() / 2.0,
              (out * oracle::pauli('z')).trace().real() / 2.0);
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= x.size();
  my /= y.size();
  double num = 0, den = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    num += (x[k] - mx) * (y[k] - my);
    den += (x[k] - mx) * (x[k] - mx);
  }
  return num / den;
}

}  // namespace

TEST_CASE("rotations follow the spin-1/2 convention") {
  for (double phase : {0.0, 37.0, 90.0, 211.0}) {
    CHECK(max_abs(CMatrix(phase_rotation(phase, 0.3)) -
                  CMatrix(rotation_oracle(in_plane(phase), 0.3))) < 1e-14);
  }
  // A pi/2 pulse about x takes z to -y (right-handed).
  const Vec3 img = bloch_image(phase_rotation(0.0, kPi / 2.0), Vec3::UnitZ());
  CHECK((img - Vec3(0.0, -1.0, 0.0)).norm() < 1e-14);
}

TEST_CASE("pulse unitaries") {
  const SpinRegister one(1);
  CHECK(max_abs(pulse_unitary(30.0, transient_model::LeadingEdge{0.0}, one) -
                CMatrix(phase_rotation(30.0, kPi / 2.0))) == 0.0);
  CHECK(max_abs(pulse_unitary(30.0, transient_model::None{}, one) -
                CMatrix(phase_rotation(30.0, kPi / 2.0))) == 0.0);

  const Mat2c err = pulse_unitary_1q(0.0, transient_model::LeadingEdge{10.0});
  const Mat2c expected = rotation_oracle(Vec3::UnitX(), kPi / 2.0) *
                         rotation_oracle(Vec3::UnitY(), deg_to_rad(10.0));
  CHECK(max_abs(CMatrix(err) - CMatrix(expected)) < 1e-14);
  const Vec3 img = bloch_image(err, Vec3::UnitZ());
  CHECK((img - Vec3(0.0, -1.0, 0.0)).norm() > 0.1);
  // z picks up sin(theta) toward +x first, then the x pulse leaves it along x.
  CHECK(img.x() == doctest::Approx(std::sin(deg_to_rad(10.0))).epsilon(1e-12));

  const Mat2c bal = pulse_unitary_1q(45.0, transient_model::Balanced{0.2});
  const Vec3 gen = (kPi / 2.0) * in_plane(45.0) + 0.2 * Vec3::UnitZ();
  CHECK(max_abs(CMatrix(bal) - CMatrix(rotation_oracle(gen.normalized(), gen.norm()))) < 1e-13);

  // No single balanced pulse maps z to -z when eps != 0: the best is a tilted pi rotation.
  for (double eps : {0.01, 0.1, 0.5}) {
    for (double phase = 0; phase < 360; phase += 15) {
      const Vec3 z = bloch_image(balanced_pulse_1q(phase, eps), Vec3::UnitZ());
      CHECK(z.z() > -1.0 + 1e-6);
    }
  }

  const SpinRegister three(3);
  CHECK(max_abs(pulse_unitary(90.0, transient_model::LeadingEdge{7.0}, three) -
                oracle::kron(oracle::kron(CMatrix(pulse_unitary_1q(90.0, transient_model::LeadingEdge{7.0})),
                                          CMatrix(pulse_unitary_1q(90.0, transient_model::LeadingEdge{7.0}))),
                             CMatrix(pulse_unitary_1q(90.0, transient_model::LeadingEdge{7.0})))) < 1e-14);

  CHECK_THROWS_AS(validate(transient_model::LeadingEdge{50.0}), InputError);
  CHECK_THROWS_AS(validate(transient_model::Balanced{1.0}), InputError);
}

TEST_CASE("exact cancellation identity") {
  double worst = 0.0;
  for (int phase = 0; phase < 360; ++phase) {
    for (int theta = 1; theta <= 20; ++theta) {
      const Mat2c corrected = z_rotation(deg_to_rad(-theta)) *
                              pulse_unitary_1q(phase, transient_model::LeadingEdge{double(theta)});
      worst = std::max(worst, spectral_norm(CMatrix(corrected - phase_rotation(phase, kPi / 2.0))));
    }
  }
  CHECK(worst < 1e-10);

  // Trailing-edge placement is cancelled by a z rotation before the pulse.
  const Mat2c trailing = pulse_unitary_1q(60.0, transient_model::LeadingEdge{11.0, true});
  CHECK(spectral_norm(CMatrix(trailing * z_rotation(deg_to_rad(11.0)) -
                              phase_rotation(60.0, kPi / 2.0))) < 1e-12);
}

TEST_CASE("inject and correct") {
  const PulseProgram peng = build_sequence(SequenceName::Peng24, 5.0, 1.02);
  const TransientModel le = transient_model::LeadingEdge{11.0};
  const PulseProgram detailed = inject_transients(peng, le);
  CHECK(detailed.stage == Stage::Detailed);
  int kicks = 0;
  for (const auto& e : detailed.events) kicks += std::holds_alternative<event::Transient>(e);
  CHECK(kicks == 24);
  CHECK(pulse_count(detailed) == 24);
  CHECK(period_us(detailed) == period_us(peng));
  CHECK_THROWS_AS(inject_transients(detailed, le), StageError);
  CHECK_THROWS_AS(insert_frame_change(peng, le), StageError);

  PulseProgram single;
  single.events = {event::Delay{5}, event::HardPulse{0}, event::Delay{5}};
  const PulseProgram one = inject_transients(single, le);
  int rotations = 0;
  for (const auto& e : one.events)
    rotations += std::holds_alternative<event::Transient>(e) || std::holds_alternative<event::HardPulse>(e);
  CHECK(rotations == 2);

  const PulseProgram corrected = insert_frame_change(detailed, le);
  int zs = 0;
  for (const auto& e : corrected.events) {
    if (const auto* z = std::get_if<event::VirtualZ>(&e)) {
      ++zs;
      CHECK(z->angle_deg == -11.0);
    }
  }
  CHECK(zs == 24);
  CHECK(pulse_count(corrected) == 24);
  CHECK(period_us(corrected) == period_us(peng));

  const PulseProgram zero = insert_frame_change(inject_transients(peng, transient_model::LeadingEdge{0.0}),
                                                transient_model::LeadingEdge{0.0});
  for (const auto& e : zero.events) {
    if (const auto* z = std::get_if<event::VirtualZ>(&e)) CHECK(z->angle_deg == 0.0);
  }
}

TEST_CASE("single corrected pulse equals the ideal pulse") {
  const TransientModel le = transient_model::LeadingEdge{11.0};
  SimConfig cfg;
  for (double phase : {0.0, 90.0, 180.0, 270.0, 33.0}) {
    PulseProgram p;
    p.events = {event::HardPulse{phase}};
    cfg.program = insert_frame_change(inject_transients(p, le), le);
    const CMatrix u = cycle_unitary(cfg);
    CHECK(spectral_norm(u - CMatrix(phase_rotation(phase, kPi / 2.0))) < 1e-12);
  }
}

TEST_CASE("folding") {
  PulseProgram p;
  p.tau0_us = 5.0;
  p.events = {event::Delay{5}, event::HardPulse{90}, event::Delay{5}, event::HardPulse{0},
              event::Delay{5}, event::HardPulse{0},  event::Delay{5}, event::HardPulse{90},
              event::Delay{5}};
  const TransientModel le = transient_model::LeadingEdge{11.0};
  const PulseProgram exp = fold_virtual_z(insert_frame_change(inject_transients(p, le), le));
  CHECK(exp.stage == Stage::Experimental);
  CHECK(pulse_phases(exp) == std::vector<double>{90, 11, 22, 123});
  CHECK(exp.frame_deg == -44.0);
  for (const auto& e : exp.events) {
    CHECK_FALSE(std::holds_alternative<event::VirtualZ>(e));
    CHECK_FALSE(std::holds_alternative<event::Transient>(e));
  }

  const TransientModel none = transient_model::LeadingEdge{0.0};
  CHECK(pulse_phases(fold_virtual_z(insert_frame_change(inject_transients(p, none), none))) ==
        pulse_phases(p));

  PulseProgram q;
  q.stage = Stage::Detailed;
  q.events = {event::VirtualZ{-10.4}, event::HardPulse{0}, event::VirtualZ{-0.1}, event::HardPulse{0}};
  CHECK(pulse_phases(fold_virtual_z(q)) == std::vector<double>{10, 11});
  CHECK(quantize_phase_deg(10.4) == 10.0);
  CHECK(quantize_phase_deg(10.5) == 11.0);
  CHECK(quantize_phase_deg(-0.5) == 359.0);
  CHECK(quantize_phase_deg(359.6) == 0.0);
  CHECK_THROWS_AS(fold_virtual_z(p), StageError);

  // Per-pulse quantization error stays within half a degree.
  const PulseProgram peng = build_sequence(SequenceName::Peng24, 5.0, 1.02);
  const TransientModel odd = transient_model::LeadingEdge{7.3};
  const PulseProgram detailed = insert_frame_change(inject_transients(peng, odd), odd);
  const auto exact = pulse_phases(fold_virtual_z(detailed, false));
  const auto rounded = pulse_phases(fold_virtual_z(detailed, true));
  for (std::size_t k = 0; k < exact.size(); ++k) {
    double d = std::abs(exact[k] - rounded[k]);
    d = std::min(d, 360.0 - d);
    CHECK(d <= 0.5 + 1e-12);
  }
}

TEST_CASE("folding equivalence: U_exp = Rz(-Theta) U_detailed") {
  SimConfig cfg;
  cfg.reg = SpinRegister(3);
  cfg.couplings = CouplingTable::chain(3);
  cfg.disorder = DisorderRealization{{1.0, -2.0, 3.0}};
  for (double theta : {3.0, 11.0, -7.5}) {
    const TransientModel le = transient_model::LeadingEdge{theta};
    const PulseProgram detailed = insert_frame_change(
        inject_transients(build_sequence(SequenceName::Angle12, 5.0, 0.0), le), le);
    PulseProgram exp = fold_virtual_z(detailed, false);
    const double total = exp.frame_deg;
    CHECK(total == doctest::Approx(-12 * theta));
    exp.frame_deg = 0.0;  // bare folded program
    const CMatrix ud = cycle_unitary(cfg, detailed, DisorderRealization{{1.0, -2.0, 3.0}});
    SimConfig hw = cfg;
    hw.transient = le;
    const CMatrix ue = cycle_unitary(hw, exp, DisorderRealization{{1.0, -2.0, 3.0}});
    CMatrix rz = CMatrix::Identity(8, 8);
    apply_on_every_site(rz, z_rotation(deg_to_rad(-total)), 3);
    CHECK(spectral_norm(ue - rz * ud) < 1e-10);
  }
}

TEST_CASE("balanced frame change cancels to leading order") {
  CHECK(balanced_frame_change_angle(0.0) == 0.0);
  std::vector<double> log_eps, log_inf;
  for (double eps : {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}) {
    const double alpha = balanced_frame_change_angle(eps);
    CHECK(alpha == doctest::Approx(-4.0 / kPi * eps).epsilon(0.05));
    const Mat2c half = z_rotation(alpha / 2.0);
    const double corrected = single_spin_infidelity(half * balanced_pulse_1q(0.0, eps) * half,
                                                    phase_rotation(0.0, kPi / 2.0));
    const double bare = single_spin_infidelity(balanced_pulse_1q(0.0, eps), phase_rotation(0.0, kPi / 2.0));
    CHECK(corrected < bare);
    log_eps.push_back(std::log(eps));
    log_inf.push_back(std::log(std::max(corrected, 1e-300)));
  }
  CHECK(slope(log_eps, log_inf) >= 1.9);

  const TransientModel bal = transient_model::Balanced{0.05};
  const PulseProgram mrev = build_sequence(SequenceName::Mrev8, 5.0, 0.0);
  const PulseProgram d = insert_frame_change(inject_transients(mrev, bal), bal);
  CHECK(pulse_count(d) == 8);
  int zs = 0;
  for (const auto& e : d.events) zs += std::holds_alternative<event::VirtualZ>(e);
  CHECK(zs == 16);
}
