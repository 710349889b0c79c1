#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "framechange/aht.hpp"
#include "framechange/linalg.hpp"
#include "framechange/pulseprog.hpp"
#include "framechange/spinsys.hpp"
#include "framechange/transient.hpp"

namespace framechange {

enum class PulseMode { Delta, Finite };

PulseMode parse_pulse_mode(std::string_view text);  // "delta" | "finite"

inline constexpr double kDefaultSigmaH = 6.069;  // krad/s

// i.i.d. Gaussian(0, sigma_h) field per spin; realization r draws from stream (seed, r).
struct GaussianDisorder {
  double sigma_h = kDefaultSigmaH;
  std::uint64_t seed = 1;
  int realizations = 1;
};

using DisorderSource = std::variant<DisorderRealization, GaussianDisorder>;

struct SimConfig {
  SpinRegister reg{1};
  CouplingTable couplings = CouplingTable::chain(1);
  DisorderSource disorder = DisorderRealization{{0.0}};
  PulseMode mode = PulseMode::Delta;
  // Hardware error applied to pulses of logical and experimental programs. Detailed programs
  // carry their errors as explicit events and ignore this field.
  TransientModel transient = transient_model::None{};
  int n_cycles = 1;
  PulseProgram program;
};

// Throws InputError/ConstraintError for inconsistent configurations.
void validate(const SimConfig& cfg);

int realization_count(const SimConfig& cfg);
DisorderRealization realization(const SimConfig& cfg, int index);

// Internal Hamiltonian of spin-1/2 particles (S = sigma/2) in rad/us:
// secular dipolar coupling about z plus the longitudinal disorder field.
CMatrix internal_hamiltonian(const SpinRegister& reg, const CouplingTable& j,
                             const DisorderRealization& h);

// Physical generator (rad/us) of an average Hamiltonian in coefficient form.
CMatrix average_hamiltonian_matrix(const SpinRegister& reg, const CouplingTable& j,
                                   const DisorderRealization& h, const AverageHamiltonian& ah);

// Rabi frequency of a pi/2 pulse of width tp, rad/us.
double rf_amplitude(double tp_us);

// One Floquet period of `program` for a fixed disorder realization. Experimental programs end
// with the recorded frame rotation Rz(frame_deg).
CMatrix cycle_unitary(const SimConfig& cfg, const PulseProgram& program,
                      const DisorderRealization& h);
// cfg.program with realization 0.
CMatrix cycle_unitary(const SimConfig& cfg);

struct Trajectory {
  std::vector<double> times_us;
  std::vector<double> values;
  std::vector<double> stderr_values;  // empty for single realizations
};

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

// Infinite-temperature autocorrelator Tr(U^k+ S U^k S)/Tr(S^2) at t = k T, k = 0..n_cycles,
// averaged over the configured disorder.
Trajectory autocorrelator(const SimConfig& cfg, Axis axis);
Trajectory autocorrelator(const SimConfig& cfg, const PulseProgram& program, Axis axis);

// Stroboscopic correlator of a fixed cycle unitary.
std::vector<double> stroboscopic_correlator(const CMatrix& u, const CMatrix& observable,
                                            int n_cycles);

struct CalibrationScan {
  std::vector<double> deltas_deg;
  std::vector<double> sz;      // <S_z> after the two-pulse scan, normalized
  double argmin_delta_deg;     // minimizer of |<S_z>|
  double estimated_theta_deg;  // = -argmin_delta_deg
};

// Two erroneous pulses on one spin starting from S_z: phase 90 + delta, then phase 0.
// With these conventions <S_z>(delta) = sin(delta + theta_fc), so the minimum sits at
// delta = -theta_fc.
CalibrationScan calibration_scan(double theta_fc_true_deg, const std::vector<double>& deltas_deg);

// Pulse program as the hardware executes it: transients injected, optionally corrected.
PulseProgram compile_detailed(const PulseProgram& logical, const TransientModel& model,
                              bool corrected);

// Loschmidt echo S(kT) = Tr(V_k+ S_z V_k S_z)/Tr(S_z^2), V_k = U_back^k U_fwd^k, where the
// forward program is Wei16 engineering the DQ Hamiltonian with strength u and the backward
// program its reflection. Both run under cfg.transient, corrected or not.
Trajectory loschmidt_echo(const SimConfig& cfg, double u, int k_max, bool corrected);

enum class FitStatus { Decaying, NonDecaying };

struct ExponentialFit {
  double amplitude;
  double tau_us;  // +infinity when NonDecaying
  double residual_rms;
  FitStatus status;
};

// A exp(-t/tau) by weighted regression of log values (weights value^2).
ExponentialFit fit_exponential(const Trajectory& traj);

struct QuadratureResult {
  Trajectory cx;
  Trajectory cz;
};

// MREV-8 quadrature autocorrelators under the balanced transient, disorder averaged.
// cfg.program must be an MREV-8 logical program.
QuadratureResult mrev_quadrature_experiment(const SimConfig& cfg,
                                            const transient_model::Balanced& model,
                                            bool corrected);

struct EffectiveFieldModel {
  double h_eps;  // krad/s
  double residual_rms;
};

// Single-spin prediction under the effective field (h/3) x + ((h + 3 h_eps)/3) z, averaged over
// h ~ Gaussian(0, sigma_h).
double mrev_effective_field_correlator(double h_eps, double sigma_h, Axis axis, double t_us);

// Fits |h_eps| to quadrature data of an uncorrected MREV run (the disorder-averaged quadratures
// do not depend on the sign of h_eps).
EffectiveFieldModel fit_effective_field(const QuadratureResult& data, double sigma_h);

}  // namespace framechange
