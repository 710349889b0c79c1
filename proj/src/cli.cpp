#include "framechange/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "framechange/aht.hpp"
#include "framechange/disorder.hpp"
#include "framechange/dynamics.hpp"
#include "framechange/error.hpp"
#include "framechange/pulseprog.hpp"
#include "framechange/transient.hpp"

namespace framechange {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

// Flag values shared by every subcommand. Zero / negative / NaN / empty means "use the
// command's default".
struct RunConfig {
  std::string program;
  std::string sequence;
  std::string out;
  std::string config;
  std::string stage = "experimental";
  std::string mode;
  std::string axis = "z";
  std::string grid = "-20:1:20";
  std::string geometry;
  std::string figure;
  std::uint64_t seed = 1;
  double tau0 = 5.0;
  double tp = 1.02;
  double theta_fc = kUnset;
  double epsilon_fc = kUnset;
  double sigma_h = kDefaultSigmaH;
  double j0 = CouplingTable::kDefaultJ0;
  double beta = 0.0;
  double omega = 2.0 * kPi * 300e6;
  double spin = 0.5;
  bool correct = false;
  bool no_quantize = false;
  int spins = 0;
  int cycles = -1;
  int realizations = 0;
  int bins = 60;
  std::size_t samples = 0;
};

std::string data_dir() {
  if (const char* dir = std::getenv("FRAMECHANGE_DATA_DIR"); dir && *dir) return dir;
  return FRAMECHANGE_DEFAULT_DATA_DIR;
}

std::string default_geometry() { return data_dir() + "/geometry/fluorapatite_27cell.geom"; }

void apply_config_file(CLI::App& sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::string line;
  int number = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", number, 1);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (!opt || key == "config") throw ParseError("unknown config key '" + key + "'", number, 1);
    if (opt->count() > 0) continue;  // command-line flags win
    opt->add_result(value);
    opt->run_callback();
  }
}

PulseProgram load_program(const RunConfig& c) {
  if (!c.program.empty() && !c.sequence.empty()) {
    throw InputError("pass either a program file or --sequence, not both");
  }
  if (!c.program.empty()) return read_program_file(c.program);
  if (c.sequence.empty()) throw InputError("no program given (file argument or --sequence)");
  return build_sequence(parse_sequence_name(c.sequence), c.tau0, c.tp);
}

TransientModel transient_from(const RunConfig& c) {
  const bool theta = !std::isnan(c.theta_fc);
  const bool eps = !std::isnan(c.epsilon_fc);
  if (theta && eps) throw InputError("--theta-fc and --epsilon-fc are mutually exclusive");
  TransientModel model = transient_model::None{};
  if (theta) model = transient_model::LeadingEdge{c.theta_fc};
  if (eps) model = transient_model::Balanced{c.epsilon_fc};
  validate(model);
  return model;
}

Axis parse_axis(const std::string& s) {
  if (s == "x") return Axis::X;
  if (s == "y") return Axis::Y;
  if (s == "z") return Axis::Z;
  throw InputError("unknown axis '" + s + "' (expected x, y or z)");
}

void emit(const RunConfig& c, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (c.out.empty()) {
    body(out);
    return;
  }
  std::ofstream file(c.out);
  if (!file) throw InputError("cannot write '" + c.out + "'");
  body(file);
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream file(path);
  if (!file) throw InputError("cannot write '" + path.string() + "'");
  body(file);
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream in(spec);
  std::string tok;
  while (std::getline(in, tok, ':')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size()) throw InputError("bad grid '" + spec + "' (lo:step:hi)");
    parts.push_back(v);
  }
  if (parts.size() != 3 || !(parts[1] > 0.0) || parts[2] < parts[0]) {
    throw InputError("bad grid '" + spec + "' (lo:step:hi with step > 0)");
  }
  const int n = static_cast<int>(std::floor((parts[2] - parts[0]) / parts[1] + 1e-9));
  std::vector<double> grid;
  for (int k = 0; k <= n; ++k) grid.push_back(parts[0] + k * parts[1]);
  return grid;
}

void check_experimental(const PulseProgram& p, bool quantized) {
  if (quantized) {
    check_experimental_constraints(p);
    return;
  }
  // Pre-quantization output: only the timing constraints apply.
  PulseProgram rounded = p;
  for (auto& e : rounded.events) {
    if (auto* hp = std::get_if<event::HardPulse>(&e)) hp->phase_deg = quantize_phase_deg(hp->phase_deg);
  }
  check_experimental_constraints(rounded);
}

// Simulation setup shared by `simulate` and `reproduce`.
SimConfig sim_config(const RunConfig& c, int default_spins, int default_cycles,
                     int default_realizations, const std::string& default_mode) {
  SimConfig sim;
  const int n = c.spins > 0 ? c.spins : default_spins;
  sim.reg = SpinRegister(n);
  sim.couplings = CouplingTable::chain(n, c.j0);
  if (c.sigma_h == 0.0) {
    sim.disorder = DisorderRealization::zero(n);
  } else {
    sim.disorder = GaussianDisorder{c.sigma_h, c.seed, c.realizations > 0 ? c.realizations : default_realizations};
  }
  sim.mode = parse_pulse_mode(c.mode.empty() ? default_mode : c.mode);
  sim.n_cycles = c.cycles >= 0 ? c.cycles : default_cycles;
  return sim;
}

// Logical programs run under the hardware transient, or as their corrected detailed form.
void set_program(SimConfig& sim, const PulseProgram& p, const TransientModel& model, bool correct) {
  if (p.stage == Stage::Logical && correct) {
    sim.program = compile_detailed(p, model, true);
    sim.transient = transient_model::None{};
  } else {
    sim.program = p;
    sim.transient = model;
  }
}

int cmd_compile(const RunConfig& c, std::ostream& out) {
  const PulseProgram p = load_program(c);
  const TransientModel model = transient_from(c);
  const Stage target = parse_stage(c.stage);
  if (target == Stage::Logical) throw InputError("compile emits the detailed or experimental stage");
  if (target == Stage::Detailed && p.stage == Stage::Experimental) {
    throw StageError("an experimental program cannot be lowered to the detailed stage");
  }
  PulseProgram result = p.stage == Stage::Logical ? compile_detailed(p, model, c.correct) : p;
  if (target == Stage::Experimental) {
    if (result.stage == Stage::Detailed) result = fold_virtual_z(result, !c.no_quantize);
    check_experimental(result, !c.no_quantize);
  }
  emit(c, out, [&](std::ostream& os) { os << print_program(result); });
  return kExitOk;
}

int cmd_aht(const RunConfig& c, std::ostream& out) {
  const AverageHamiltonian ah = average_hamiltonian(load_program(c));
  json j;
  j["A"] = json::array();
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) j["A"].push_back(ah.a(r, k));
  j["b"] = {ah.b.x(), ah.b.y(), ah.b.z()};
  j["period_us"] = ah.period_us;
  emit(c, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  return kExitOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  SimConfig sim = sim_config(c, 4, 50, 1, "delta");
  set_program(sim, load_program(c), transient_from(c), c.correct);
  const Trajectory traj = autocorrelator(sim, parse_axis(c.axis));
  emit(c, out, [&](std::ostream& os) { write_trajectory_csv(os, traj); });
  return kExitOk;
}

void write_scan(std::ostream& os, const CalibrationScan& scan) {
  os << "delta_deg,sz\n";
  os.precision(12);
  for (std::size_t k = 0; k < scan.sz.size(); ++k) os << scan.deltas_deg[k] << ',' << scan.sz[k] << '\n';
}

int cmd_calibrate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (std::isnan(c.theta_fc)) throw InputError("calibrate needs --theta-fc");
  const CalibrationScan scan = calibration_scan(c.theta_fc, parse_grid(c.grid));
  emit(c, out, [&](std::ostream& os) { write_scan(os, scan); });
  (c.out.empty() ? err : out) << "estimated theta_fc = " << scan.estimated_theta_deg << " deg\n";
  return kExitOk;
}

ThermalEnsemble ensemble_from(const RunConfig& c) {
  const double two_s = 2.0 * c.spin;
  if (!(two_s >= 1.0) || two_s != std::round(two_s)) {
    throw InputError("--spin must be a positive multiple of 1/2");
  }
  if (c.beta == 0.0) return ThermalEnsemble::infinite_temperature(static_cast<int>(two_s));
  return ThermalEnsemble::from_beta_omega(static_cast<int>(two_s), c.beta, c.omega);
}

void write_stats(std::ostream& os, const LatticeGeometry& geom, const FieldSamples& mc,
                 const DisorderStats& exact) {
  os.precision(12);
  os << "quantity,value\n"
     << "sources," << geom.couplings.size() << '\n'
     << "samples," << mc.samples.size() << '\n'
     << "mc_mean," << mc.stats.mean << '\n'
     << "mc_variance," << mc.stats.variance << '\n'
     << "mc_sigma," << mc.stats.sigma() << '\n'
     << "analytic_mean," << exact.mean << '\n'
     << "analytic_variance," << exact.variance << '\n'
     << "analytic_sigma," << exact.sigma() << '\n'
     << "skewness," << sample_skewness(mc.samples) << '\n';
}

int cmd_disorder(const RunConfig& c, std::ostream& out) {
  const LatticeGeometry geom = read_geometry_file(c.geometry.empty() ? default_geometry() : c.geometry);
  const ThermalEnsemble ens = ensemble_from(c);
  const FieldSamples mc = mc_sample_field(geom, ens, c.samples > 0 ? c.samples : 100000, c.seed);
  const DisorderStats exact = analytic_moments(geom, ens);
  if (c.out.empty()) {
    write_stats(out, geom, mc, exact);
    return kExitOk;
  }
  fs::create_directories(c.out);
  write_file(fs::path(c.out) / "stats.csv", [&](std::ostream& os) { write_stats(os, geom, mc, exact); });
  write_file(fs::path(c.out) / "histogram.csv",
             [&](std::ostream& os) { write_histogram_csv(os, histogram(mc.samples, c.bins)); });
  return kExitOk;
}

// Amplitude and decay time of the leading positive part of a trajectory.
json fit_json(const Trajectory& traj) {
  Trajectory head;
  for (std::size_t k = 0; k < traj.values.size() && traj.values[k] > 0.0; ++k) {
    head.times_us.push_back(traj.times_us[k]);
    head.values.push_back(traj.values[k]);
  }
  if (head.values.size() < 4) return {{"status", "too_few_positive_points"}};
  const ExponentialFit fit = fit_exponential(head);
  json j;
  j["amplitude"] = fit.amplitude;
  j["tau_us"] = fit.status == FitStatus::Decaying ? json(fit.tau_us) : json("inf");
  j["residual_rms"] = fit.residual_rms;
  return j;
}

class Reproduction {
 public:
  Reproduction(const RunConfig& c, std::string figure)
      : dir_(c.out.empty() ? "framechange_" + figure : c.out) {
    fs::create_directories(dir_);
    manifest_["figure"] = std::move(figure);
    manifest_["files"] = json::array();
    manifest_["operations"] = json::array();
    manifest_["results"] = json::object();
  }

  void trajectory(const std::string& name, const Trajectory& t, const std::string& what) {
    file(name, what, [&](std::ostream& os) { write_trajectory_csv(os, t); });
  }

  void file(const std::string& name, const std::string& what,
            const std::function<void(std::ostream&)>& body) {
    write_file(dir_ / name, body);
    manifest_["files"].push_back({{"path", name}, {"content", what}});
  }

  void operation(const std::string& op) {
    for (const auto& o : manifest_["operations"])
      if (o == op) return;
    manifest_["operations"].push_back(op);
  }

  json& results() { return manifest_["results"]; }
  json& parameters() { return manifest_["parameters"]; }

  void finish(std::ostream& out) {
    write_file(dir_ / "manifest.json", [&](std::ostream& os) { os << manifest_.dump(2) << '\n'; });
    out << "wrote " << manifest_["files"].size() << " files to " << dir_.string() << '\n';
  }

 private:
  fs::path dir_;
  json manifest_;
};

void reproduce_fig1(const RunConfig& c, Reproduction& r) {
  const double theta = std::isnan(c.theta_fc) ? 11.0 : c.theta_fc;
  const CalibrationScan scan = calibration_scan(theta, parse_grid(c.grid));
  r.operation("dynamics.calibration_scan");
  r.file("calibration.csv", "two-pulse <Sz> scan against the phase offset delta",
         [&](std::ostream& os) { write_scan(os, scan); });
  r.parameters() = {{"theta_fc_deg", theta}, {"grid", c.grid}};
  r.results()["estimated_theta_fc_deg"] = scan.estimated_theta_deg;
}

void reproduce_fig3(const RunConfig& c, Reproduction& r) {
  const double theta = std::isnan(c.theta_fc) ? 11.0 : c.theta_fc;
  const TransientModel model = transient_model::LeadingEdge{theta};
  SimConfig sim = sim_config(c, 6, 50, 10, "finite");
  for (auto name : {SequenceName::Peng24, SequenceName::Angle12}) {
    const PulseProgram logical = build_sequence(name, c.tau0, c.tp);
    for (bool corrected : {true, false}) {
      set_program(sim, logical, model, corrected);
      const std::string tag = std::string(sequence_name(name)) + (corrected ? "_corrected" : "_uncorrected");
      r.trajectory(tag + ".csv", autocorrelator(sim, Axis::Z), "C_z(kT), " + tag);
    }
  }
  r.operation("pulseprog.build_sequence");
  r.operation("transient.inject_transients");
  r.operation("transient.insert_frame_change");
  r.operation("dynamics.autocorrelator");
  r.parameters() = {{"theta_fc_deg", theta},   {"tau0_us", c.tau0},
                    {"tp_us", c.tp},           {"spins", sim.reg.n_spins()},
                    {"cycles", sim.n_cycles},  {"realizations", realization_count(sim)},
                    {"mode", sim.mode == PulseMode::Finite ? "finite" : "delta"}};
}

void reproduce_fig4(const RunConfig& c, Reproduction& r) {
  const double eps = std::isnan(c.epsilon_fc) ? 0.05 : c.epsilon_fc;
  const double sigma = c.sigma_h;
  SimConfig sim = sim_config(c, 4, 40, 10, "delta");
  sim.program = build_sequence(SequenceName::Mrev8, c.tau0, c.tp);
  const transient_model::Balanced model{eps};
  const QuadratureResult corr = mrev_quadrature_experiment(sim, model, true);
  const QuadratureResult raw = mrev_quadrature_experiment(sim, model, false);
  r.trajectory("x_corrected.csv", corr.cx, "C_x, corrected");
  r.trajectory("z_corrected.csv", corr.cz, "C_z, corrected");
  r.trajectory("x_uncorrected.csv", raw.cx, "C_x, uncorrected");
  r.trajectory("z_uncorrected.csv", raw.cz, "C_z, uncorrected");
  const auto analytic = characteristic_correlator(field_distribution::Gaussian{sigma});
  r.file("analytic.csv", "1/2 + 1/2 exp(-(sigma_h t)^2/9)", [&](std::ostream& os) {
    os << "t_us,value\n";
    os.precision(12);
    for (double t : corr.cz.times_us) os << t << ',' << analytic(t) << '\n';
  });
  r.operation("dynamics.mrev_quadrature_experiment");
  r.operation("disorder.characteristic_correlator");
  r.operation("dynamics.fit_effective_field");
  if (sigma > 0.0) r.results()["h_eps_krad_s"] = fit_effective_field(raw, sigma).h_eps;
  r.parameters() = {{"epsilon_fc_rad", eps},   {"tau0_us", c.tau0},
                    {"spins", sim.reg.n_spins()}, {"cycles", sim.n_cycles},
                    {"sigma_h", sigma},        {"realizations", realization_count(sim)}};
}

void reproduce_fig5(const RunConfig& c, Reproduction& r) {
  const double theta = std::isnan(c.theta_fc) ? 11.0 : c.theta_fc;
  SimConfig sim = sim_config(c, 6, 20, 4, "delta");
  sim.transient = transient_model::LeadingEdge{theta};
  sim.program = build_sequence(SequenceName::Wei16, c.tau0, c.tp);
  json fits = json::array();
  for (double u : {0.2, 0.5, 1.0}) {
    for (bool corrected : {true, false}) {
      const Trajectory t = loschmidt_echo(sim, u, sim.n_cycles, corrected);
      std::ostringstream tag;
      tag << "echo_u" << u << (corrected ? "_corrected" : "_uncorrected");
      r.trajectory(tag.str() + ".csv", t, "Loschmidt echo S(kT)");
      json f = fit_json(t);
      f["u"] = u;
      f["corrected"] = corrected;
      fits.push_back(f);
    }
  }
  r.operation("aht.solve_wei16_for_dq");
  r.operation("pulseprog.reflect_for_reversal");
  r.operation("dynamics.loschmidt_echo");
  r.operation("dynamics.fit_exponential");
  r.results()["fits"] = fits;
  r.parameters() = {{"theta_fc_deg", theta},     {"tau0_us", c.tau0},
                    {"spins", sim.reg.n_spins()}, {"cycles", sim.n_cycles},
                    {"realizations", realization_count(sim)}};
}

void reproduce_figA2(const RunConfig& c, Reproduction& r) {
  const std::string path = c.geometry.empty() ? default_geometry() : c.geometry;
  const LatticeGeometry geom = read_geometry_file(path);
  const ThermalEnsemble ens = ensemble_from(c);
  const FieldSamples mc = mc_sample_field(geom, ens, c.samples > 0 ? c.samples : 1000000, c.seed);
  const DisorderStats exact = analytic_moments(geom, ens);
  const Histogram hist = histogram(mc.samples, c.bins);
  r.file("histogram.csv", "sampled field histogram (krad/s)",
         [&](std::ostream& os) { write_histogram_csv(os, hist); });
  r.file("gaussian.csv", "moment-matched Gaussian, expected counts per bin", [&](std::ostream& os) {
    os << "bin_center,expected_count\n";
    os.precision(12);
    const double width = (hist.hi - hist.lo) / hist.counts.size();
    const double s = mc.stats.sigma();
    for (std::size_t k = 0; k < hist.counts.size(); ++k) {
      const double x = hist.lo + width * (k + 0.5);
      const double z = (x - mc.stats.mean) / s;
      os << x << ',' << mc.samples.size() * width * std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * kPi)) << '\n';
    }
  });
  r.file("stats.csv", "sampled and analytic moments",
         [&](std::ostream& os) { write_stats(os, geom, mc, exact); });
  r.operation("disorder.mc_sample_field");
  r.operation("disorder.analytic_moments");
  r.results()["mc_sigma"] = mc.stats.sigma();
  r.results()["analytic_sigma"] = exact.sigma();
  r.parameters() = {{"geometry", path}, {"samples", mc.samples.size()}, {"seed", c.seed}};
}

int cmd_reproduce(const RunConfig& c, std::ostream& out) {
  static const std::map<std::string, void (*)(const RunConfig&, Reproduction&)> figures = {
      {"fig1", reproduce_fig1}, {"fig3", reproduce_fig3}, {"fig4", reproduce_fig4},
      {"fig5", reproduce_fig5}, {"figA2", reproduce_figA2}};
  const auto it = figures.find(c.figure);
  if (it == figures.end()) {
    throw InputError("unknown figure '" + c.figure + "' (expected fig1, fig3, fig4, fig5 or figA2)");
  }
  Reproduction r(c, c.figure);
  it->second(c, r);
  r.finish(out);
  return kExitOk;
}

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--seed", c.seed, "Master RNG seed");
  sub->add_option("--out", c.out, "Output path");
  sub->add_option("--config", c.config, "Flat key=value file; flags override it");
  sub->add_option("--tau0", c.tau0, "Base delay tau0 (us)");
  sub->add_option("--tp", c.tp, "Pulse width (us)");
  sub->add_option("--theta-fc", c.theta_fc, "Leading-edge transient angle (deg)");
  sub->add_option("--epsilon-fc", c.epsilon_fc, "Balanced transient deflection (rad)");
  sub->add_option("--correct", c.correct, "Apply the frame-change correction (true/false)");
  sub->add_option("--spins", c.spins, "Number of spins");
  sub->add_option("--cycles", c.cycles, "Number of Floquet cycles");
  sub->add_option("--mode", c.mode, "Pulse model: delta or finite");
}

void add_program_source(CLI::App* sub, RunConfig& c) {
  sub->add_option("program", c.program, "Pulse program file");
  sub->add_option("--sequence", c.sequence, "Named sequence: wei16, angle12, peng24, mrev8");
}

void add_disorder_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--samples", c.samples, "Monte Carlo samples");
  sub->add_option("--beta", c.beta, "Inverse temperature (1/J); 0 for infinite temperature");
  sub->add_option("--omega", c.omega, "Larmor frequency of the sources (rad/s)");
  sub->add_option("--spin", c.spin, "Source spin quantum number");
  sub->add_option("--bins", c.bins, "Histogram bins");
}

void add_sim_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--sigma-h", c.sigma_h, "Disorder standard deviation (krad/s); 0 disables");
  sub->add_option("--realizations", c.realizations, "Disorder realizations");
  sub->add_option("--j0", c.j0, "Nearest-neighbour coupling J0 (krad/s)");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Phase-transient frame-change compiler and spin simulator", "framechange"};
  app.require_subcommand(1);

  CLI::App* compile = app.add_subcommand("compile", "Compile a logical program to the detailed or experimental stage");
  add_common(compile, c);
  add_program_source(compile, c);
  compile->add_option("--stage", c.stage, "Target stage: detailed or experimental");
  compile->add_flag("--no-quantize", c.no_quantize, "Keep folded phases off the 1 degree grid");

  CLI::App* aht = app.add_subcommand("aht", "Print the zeroth-order average Hamiltonian as JSON");
  add_common(aht, c);
  add_program_source(aht, c);

  CLI::App* simulate = app.add_subcommand("simulate", "Autocorrelator trajectory of a program");
  add_common(simulate, c);
  add_program_source(simulate, c);
  add_sim_options(simulate, c);
  simulate->add_option("--axis", c.axis, "Observable axis: x, y or z");

  CLI::App* calibrate = app.add_subcommand("calibrate", "Two-pulse frame-change calibration scan");
  add_common(calibrate, c);
  calibrate->add_option("--grid", c.grid, "Phase offsets lo:step:hi (deg)");

  CLI::App* disorder = app.add_subcommand("disorder", "Disorder field statistics of a source geometry");
  add_common(disorder, c);
  disorder->add_option("geometry", c.geometry, "Geometry file (default: shipped fluorapatite cluster)");
  add_disorder_options(disorder, c);

  CLI::App* reproduce = app.add_subcommand("reproduce", "Write the data behind one figure");
  add_common(reproduce, c);
  reproduce->add_option("figure", c.figure, "fig1, fig3, fig4, fig5 or figA2")->required();
  reproduce->add_option("--geometry", c.geometry, "Geometry file for figA2");
  reproduce->add_option("--grid", c.grid, "Phase offsets for fig1 (lo:step:hi)");
  add_sim_options(reproduce, c);
  add_disorder_options(reproduce, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!c.config.empty()) apply_config_file(*sub, c.config);
    if (sub == compile) return cmd_compile(c, out);
    if (sub == aht) return cmd_aht(c, out);
    if (sub == simulate) return cmd_simulate(c, out);
    if (sub == calibrate) return cmd_calibrate(c, out, err);
    if (sub == disorder) return cmd_disorder(c, out);
    return cmd_reproduce(c, out);
  } catch (const CLI::ParseError& e) {
    err << "error: config: " << e.what() << '\n';
    return kExitInput;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ConstraintError& e) {
    err << "constraint violation: " << e.what() << '\n';
    return kExitConstraint;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace framechange
