#include "framechange/dynamics.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <random>

#include "framechange/error.hpp"
#include "framechange/parallel.hpp"

namespace framechange {

namespace {

// Spin-1/2 scaling of Pauli-convention operators: one-body x1/2, two-body x1/4.
constexpr double kOneBody = 0.5;
constexpr double kTwoBody = 0.25;

void apply_phase_rotation(CMatrix& u, double phase_deg, double angle_rad, int n) {
  apply_on_every_site(u, phase_rotation(phase_deg, angle_rad), n);
}

// Evaluates one cycle of a program for a fixed Hamiltonian; pulse propagators are cached.
class CycleBuilder {
 public:
  CycleBuilder(const SimConfig& cfg, const DisorderRealization& h)
      : cfg_(cfg), n_(cfg.reg.n_spins()), h_int_(internal_hamiltonian(cfg.reg, cfg.couplings, h)),
        free_(h_int_) {}

  CMatrix run(const PulseProgram& p) {
    const bool finite = cfg_.mode == PulseMode::Finite;
    if (finite && !(p.tp_us > 0.0)) {
      throw InputError("finite-width simulation needs a program with tp > 0");
    }
    const std::vector<double> durations = free_evolution_times(p, finite ? p.tp_us : 0.0);
    CMatrix u = CMatrix::Identity(h_int_.rows(), h_int_.cols());
    for (std::size_t k = 0; k < p.events.size(); ++k) {
      const Event& e = p.events[k];
      if (std::holds_alternative<event::Delay>(e)) {
        if (durations[k] > 0.0) u = free_.evolve(durations[k]) * u;
      } else if (const auto* hp = std::get_if<event::HardPulse>(&e)) {
        pulse(u, *hp, p);
      } else if (const auto* z = std::get_if<event::VirtualZ>(&e)) {
        apply_on_every_site(u, z_rotation(deg_to_rad(z->angle_deg)), n_);
      } else if (const auto* t = std::get_if<event::Transient>(&e)) {
        apply_phase_rotation(u, t->phase_deg, deg_to_rad(t->angle_deg), n_);
      }
    }
    if (p.stage == Stage::Experimental && p.frame_deg != 0.0) {
      apply_on_every_site(u, z_rotation(deg_to_rad(p.frame_deg)), n_);
    }
    return u;
  }

 private:
  void pulse(CMatrix& u, const event::HardPulse& hp, const PulseProgram& p) {
    double deflection = hp.deflection_rad;
    const transient_model::LeadingEdge* kick = nullptr;
    if (p.stage != Stage::Detailed) {
      if (const auto* le = std::get_if<transient_model::LeadingEdge>(&cfg_.transient)) {
        if (le->theta_deg != 0.0) kick = le;
      } else if (const auto* bal = std::get_if<transient_model::Balanced>(&cfg_.transient)) {
        deflection += bal->epsilon_rad;
      }
    }
    if (kick && !kick->trailing) {
      apply_phase_rotation(u, hp.phase_deg + 90.0, deg_to_rad(kick->theta_deg), n_);
    }
    if (cfg_.mode == PulseMode::Delta) {
      apply_on_every_site(u, balanced_pulse_1q(hp.phase_deg, deflection), n_);
    } else {
      u = finite_pulse(hp.phase_deg, deflection, p.tp_us) * u;
    }
    if (kick && kick->trailing) {
      apply_phase_rotation(u, hp.phase_deg + 90.0, deg_to_rad(kick->theta_deg), n_);
    }
  }

  const CMatrix& finite_pulse(double phase_deg, double deflection, double tp) {
    const auto key = std::make_pair(phase_deg, deflection);
    auto it = pulses_.find(key);
    if (it != pulses_.end()) return it->second;
    const double phi = deg_to_rad(phase_deg);
    const double w1 = rf_amplitude(tp);
    CMatrix h = h_int_;
    h += (kOneBody * w1 * std::cos(phi)) * collective_op(cfg_.reg, Axis::X);
    h += (kOneBody * w1 * std::sin(phi)) * collective_op(cfg_.reg, Axis::Y);
    if (deflection != 0.0) h += (kOneBody * deflection / tp) * collective_op(cfg_.reg, Axis::Z);
    return pulses_.emplace(key, expm_hermitian(h, tp)).first->second;
  }

  const SimConfig& cfg_;
  int n_;
  CMatrix h_int_;
  HermitianPropagator free_;
  std::map<std::pair<double, double>, CMatrix> pulses_;
};

Trajectory average_runs(const std::vector<std::vector<double>>& runs, double period) {
  Trajectory out;
  if (runs.empty()) return out;
  const std::size_t n_points = runs.front().size();
  const double r = static_cast<double>(runs.size());
  out.values.assign(n_points, 0.0);
  for (const auto& run : runs) {
    for (std::size_t k = 0; k < n_points; ++k) out.values[k] += run[k];
  }
  for (auto& v : out.values) v /= r;
  if (runs.size() > 1) {
    out.stderr_values.assign(n_points, 0.0);
    for (const auto& run : runs) {
      for (std::size_t k = 0; k < n_points; ++k) {
        const double d = run[k] - out.values[k];
        out.stderr_values[k] += d * d;
      }
    }
    for (auto& s : out.stderr_values) s = std::sqrt(s / (r - 1.0) / r);
  }
  for (std::size_t k = 0; k < n_points; ++k) out.times_us.push_back(static_cast<double>(k) * period);
  return out;
}

void check_unitary(const CMatrix& u) {
  if (!u.allFinite() || unitarity_error(u) > 1e-9) {
    throw NumericalError("cycle propagator lost unitarity");
  }
}

double normalized_overlap(const CMatrix& w, const CMatrix& s, double norm) {
  // Tr(W^dagger S W S) / Tr(S^2)
  const CMatrix sw = s * w;
  const CMatrix ws = w * s;
  return (sw.adjoint().cwiseProduct(ws.transpose())).sum().real() / norm;
}

}  // namespace

PulseMode parse_pulse_mode(std::string_view text) {
  if (text == "delta") return PulseMode::Delta;
  if (text == "finite") return PulseMode::Finite;
  throw InputError("unknown pulse mode '" + std::string(text) + "' (expected delta or finite)");
}

void validate(const SimConfig& cfg) {
  if (cfg.couplings.size() != cfg.reg.n_spins()) {
    throw InputError("coupling table size does not match the spin count");
  }
  if (cfg.n_cycles < 0) throw InputError("cycle count must be nonnegative");
  validate(cfg.transient);
  if (const auto* fixed = std::get_if<DisorderRealization>(&cfg.disorder)) {
    fixed->validate(cfg.reg);
  } else {
    const auto& g = std::get<GaussianDisorder>(cfg.disorder);
    if (!(g.sigma_h >= 0.0) || !std::isfinite(g.sigma_h)) {
      throw InputError("sigma_h must be finite and nonnegative");
    }
    if (g.realizations < 1) throw InputError("need at least one disorder realization");
  }
  if (cfg.mode == PulseMode::Finite && !(cfg.program.tp_us > 0.0)) {
    throw InputError("finite-width mode requires tp > 0");
  }
  free_evolution_times(cfg.program, cfg.mode == PulseMode::Finite ? cfg.program.tp_us : 0.0);
}

int realization_count(const SimConfig& cfg) {
  if (const auto* g = std::get_if<GaussianDisorder>(&cfg.disorder)) return g->realizations;
  return 1;
}

DisorderRealization realization(const SimConfig& cfg, int index) {
  if (const auto* fixed = std::get_if<DisorderRealization>(&cfg.disorder)) return *fixed;
  const auto& g = std::get<GaussianDisorder>(cfg.disorder);
  std::mt19937_64 rng(derive_stream_seed(g.seed, static_cast<std::uint64_t>(index)));
  std::normal_distribution<double> gauss(0.0, 1.0);
  DisorderRealization h;
  h.h.resize(static_cast<std::size_t>(cfg.reg.n_spins()));
  for (auto& x : h.h) x = g.sigma_h * gauss(rng);
  return h;
}

CMatrix internal_hamiltonian(const SpinRegister& reg, const CouplingTable& j,
                             const DisorderRealization& h) {
  CMatrix out = (kTwoBody * kKradPerSecondToRadPerMicrosecond) * dipolar_hamiltonian(reg, j, Axis::Z);
  out += (kOneBody * kKradPerSecondToRadPerMicrosecond) * field_matrix(reg, h, Vec3::UnitZ());
  return out;
}

CMatrix average_hamiltonian_matrix(const SpinRegister& reg, const CouplingTable& j,
                                   const DisorderRealization& h, const AverageHamiltonian& ah) {
  // Coefficient form carries an explicit factor 1/2 on the two-body term.
  CMatrix out =
      (0.5 * kTwoBody * kKradPerSecondToRadPerMicrosecond) * two_body_matrix(reg, j, ah.a);
  out += (kOneBody * kKradPerSecondToRadPerMicrosecond) * field_matrix(reg, h, ah.b);
  return out;
}

double rf_amplitude(double tp_us) {
  if (!(tp_us > 0.0)) throw InputError("pulse width must be positive");
  return (kPi / 2.0) / tp_us;
}

CMatrix cycle_unitary(const SimConfig& cfg, const PulseProgram& program,
                      const DisorderRealization& h) {
  h.validate(cfg.reg);
  CMatrix u = CycleBuilder(cfg, h).run(program);
  check_unitary(u);
  return u;
}

CMatrix cycle_unitary(const SimConfig& cfg) {
  validate(cfg);
  return cycle_unitary(cfg, cfg.program, realization(cfg, 0));
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const bool with_err = !traj.stderr_values.empty();
  out << (with_err ? "t_us,value,stderr\n" : "t_us,value\n");
  out.precision(12);
  for (std::size_t k = 0; k < traj.values.size(); ++k) {
    out << traj.times_us[k] << ',' << traj.values[k];
    if (with_err) out << ',' << traj.stderr_values[k];
    out << '\n';
  }
}

std::vector<double> stroboscopic_correlator(const CMatrix& u, const CMatrix& observable,
                                            int n_cycles) {
  const double norm = (observable * observable).trace().real();
  if (!(norm > 0.0)) throw InputError("observable has zero norm");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_cycles) + 1);
  CMatrix w = CMatrix::Identity(u.rows(), u.cols());
  out.push_back(1.0);
  for (int k = 1; k <= n_cycles; ++k) {
    w = u * w;
    out.push_back(normalized_overlap(w, observable, norm));
  }
  return out;
}

Trajectory autocorrelator(const SimConfig& cfg, Axis axis) {
  return autocorrelator(cfg, cfg.program, axis);
}

Trajectory autocorrelator(const SimConfig& cfg, const PulseProgram& program, Axis axis) {
  validate(cfg);
  const CMatrix s = collective_op(cfg.reg, axis);
  const auto runs = parallel_map<std::vector<double>>(
      static_cast<std::size_t>(realization_count(cfg)), [&](std::size_t r) {
        const CMatrix u = cycle_unitary(cfg, program, realization(cfg, static_cast<int>(r)));
        return stroboscopic_correlator(u, s, cfg.n_cycles);
      });
  return average_runs(runs, period_us(program));
}

CalibrationScan calibration_scan(double theta_fc_true_deg, const std::vector<double>& deltas_deg) {
  if (deltas_deg.empty()) throw InputError("calibration scan needs at least one delta");
  const TransientModel model = transient_model::LeadingEdge{theta_fc_true_deg};
  validate(model);
  Mat2c sz;
  sz << 1.0, 0.0, 0.0, -1.0;
  CalibrationScan scan;
  scan.deltas_deg = deltas_deg;
  double best = std::numeric_limits<double>::infinity();
  for (double delta : deltas_deg) {
    const Mat2c u = pulse_unitary_1q(0.0, model) * pulse_unitary_1q(90.0 + delta, model);
    const double value = (u * sz * u.adjoint() * sz).trace().real() / 2.0;
    scan.sz.push_back(value);
    if (std::abs(value) < best) {
      best = std::abs(value);
      scan.argmin_delta_deg = delta;
    }
  }
  scan.estimated_theta_deg = -scan.argmin_delta_deg;
  if (scan.estimated_theta_deg == 0.0) scan.estimated_theta_deg = 0.0;
  return scan;
}

PulseProgram compile_detailed(const PulseProgram& logical, const TransientModel& model,
                              bool corrected) {
  PulseProgram p = inject_transients(logical, model);
  if (corrected) p = insert_frame_change(p, model);
  return p;
}

Trajectory loschmidt_echo(const SimConfig& cfg, double u, int k_max, bool corrected) {
  validate(cfg);
  if (k_max < 0) throw InputError("k_max must be nonnegative");
  const double tau0 = cfg.program.tau0_us;
  const double tp = cfg.mode == PulseMode::Finite ? cfg.program.tp_us : 0.0;
  const Wei16Params params = solve_wei16_for_dq(u, tau0, tp);
  const PulseProgram fwd_logical = build_sequence(SequenceName::Wei16, tau0, tp, params);
  const PulseProgram back_logical = reflect_for_reversal(fwd_logical);
  const PulseProgram fwd = compile_detailed(fwd_logical, cfg.transient, corrected);
  const PulseProgram back = compile_detailed(back_logical, cfg.transient, corrected);

  const CMatrix s = collective_op(cfg.reg, Axis::Z);
  const double norm = (s * s).trace().real();
  const auto runs = parallel_map<std::vector<double>>(
      static_cast<std::size_t>(realization_count(cfg)), [&](std::size_t r) {
        const DisorderRealization h = realization(cfg, static_cast<int>(r));
        const CMatrix uf = cycle_unitary(cfg, fwd, h);
        const CMatrix ub = cycle_unitary(cfg, back, h);
        std::vector<double> values{1.0};
        CMatrix f = CMatrix::Identity(uf.rows(), uf.cols());
        CMatrix b = f;
        for (int k = 1; k <= k_max; ++k) {
          f = uf * f;
          b = ub * b;
          values.push_back(normalized_overlap(b * f, s, norm));
        }
        return values;
      });
  return average_runs(runs, period_us(fwd_logical));
}

ExponentialFit fit_exponential(const Trajectory& traj) {
  const std::size_t n = traj.values.size();
  if (n < 4 || traj.times_us.size() != n) {
    throw InputError("exponential fit needs at least 4 points");
  }
  double sw = 0.0, st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double y = traj.values[k];
    if (!(y > 0.0) || !std::isfinite(y)) {
      throw InputError("exponential fit needs positive values");
    }
    const double w = y * y;
    const double t = traj.times_us[k];
    const double ly = std::log(y);
    sw += w;
    st += w * t;
    sy += w * ly;
    stt += w * t * t;
    sty += w * t * ly;
  }
  const double det = sw * stt - st * st;
  if (!(det > 0.0)) throw InputError("exponential fit needs at least two distinct times");
  const double slope = (sw * sty - st * sy) / det;
  const double intercept = (sy - slope * st) / sw;
  ExponentialFit fit;
  fit.amplitude = std::exp(intercept);
  if (slope >= 0.0) {
    fit.status = FitStatus::NonDecaying;
    fit.tau_us = std::numeric_limits<double>::infinity();
  } else {
    fit.status = FitStatus::Decaying;
    fit.tau_us = -1.0 / slope;
  }
  double sse = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double model = fit.amplitude * std::exp(slope * traj.times_us[k]);
    sse += (traj.values[k] - model) * (traj.values[k] - model);
  }
  fit.residual_rms = std::sqrt(sse / static_cast<double>(n));
  return fit;
}

QuadratureResult mrev_quadrature_experiment(const SimConfig& cfg,
                                            const transient_model::Balanced& model,
                                            bool corrected) {
  if (pulse_count(cfg.program) != 8 || cfg.program.stage != Stage::Logical) {
    throw InputError("quadrature experiment expects a logical MREV-8 program");
  }
  SimConfig run = cfg;
  run.transient = transient_model::None{};
  const PulseProgram detailed = compile_detailed(cfg.program, model, corrected);
  run.program = detailed;
  return {autocorrelator(run, detailed, Axis::X), autocorrelator(run, detailed, Axis::Z)};
}

double mrev_effective_field_correlator(double h_eps, double sigma_h, Axis axis, double t_us) {
  auto single = [&](double h) {
    const Vec3 field(h / 3.0, 0.0, (h + 3.0 * h_eps) / 3.0);
    const double magnitude = field.norm();
    if (magnitude == 0.0) return 1.0;
    const double n_mu = field(static_cast<int>(axis)) / magnitude;
    const double phase = magnitude * kKradPerSecondToRadPerMicrosecond * t_us;
    return n_mu * n_mu + (1.0 - n_mu * n_mu) * std::cos(phase);
  };
  if (sigma_h == 0.0) return single(0.0);
  // Trapezoid rule over +-8 sigma against the Gaussian weight.
  constexpr int kPoints = 801;
  const double lo = -8.0 * sigma_h;
  const double step = 16.0 * sigma_h / (kPoints - 1);
  double num = 0.0, den = 0.0;
  for (int k = 0; k < kPoints; ++k) {
    const double h = lo + step * k;
    const double w = std::exp(-0.5 * (h / sigma_h) * (h / sigma_h)) * ((k == 0 || k == kPoints - 1) ? 0.5 : 1.0);
    num += w * single(h);
    den += w;
  }
  return num / den;
}

EffectiveFieldModel fit_effective_field(const QuadratureResult& data, double sigma_h) {
  auto sse = [&](double h_eps) {
    double s = 0.0;
    for (std::size_t k = 0; k < data.cz.values.size(); ++k) {
      const double t = data.cz.times_us[k];
      const double dz = data.cz.values[k] - mrev_effective_field_correlator(h_eps, sigma_h, Axis::Z, t);
      const double dx = data.cx.values[k] - mrev_effective_field_correlator(h_eps, sigma_h, Axis::X, t);
      s += dz * dz + dx * dx;
    }
    return s;
  };
  // The Gaussian average is even in h, and flipping h and h_eps together negates the field, so
  // the quadratures only determine |h_eps|; the search runs over h_eps >= 0.
  const double span = 4.0 * std::max(sigma_h, 1.0);
  constexpr int kGrid = 400;
  double best_x = 0.0;
  double best = sse(0.0);
  for (int k = 0; k <= kGrid; ++k) {
    const double x = span * k / kGrid;
    const double v = sse(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  double lo = std::max(0.0, best_x - span / kGrid);
  double hi = best_x + span / kGrid;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = sse(x1), f2 = sse(x2);
  while (hi - lo > 1e-6 * span) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = sse(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = sse(x2);
    }
  }
  const double h_eps = (lo + hi) / 2.0;
  const double n = 2.0 * static_cast<double>(data.cz.values.size());
  return {h_eps, std::sqrt(sse(h_eps) / std::max(n, 1.0))};
}

}  // namespace framechange
