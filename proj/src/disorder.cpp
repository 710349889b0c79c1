#include "framechange/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "framechange/error.hpp"
#include "framechange/parallel.hpp"

namespace framechange {

namespace {

constexpr std::size_t kChunkSize = 8192;

double parse_field(std::istringstream& in, int line, const char* what) {
  std::string tok;
  if (!(in >> tok)) throw ParseError(std::string("missing ") + what, line, 1);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || !std::isfinite(v)) {
    throw ParseError(std::string("invalid ") + what + " '" + tok + "'", line, 1);
  }
  return v;
}

}  // namespace

double LatticeGeometry::sum() const {
  double s = 0.0;
  for (double j : couplings) s += j;
  return s;
}

double LatticeGeometry::sum_of_squares() const {
  double s = 0.0;
  for (double j : couplings) s += j * j;
  return s;
}

double positional_coupling(double r_nm, double theta_rad, double j0) {
  if (!(r_nm > 0.0)) throw InputError("source distance must be positive");
  const double c = std::cos(theta_rad);
  return (1.0 - 3.0 * c * c) * j0 / (r_nm * r_nm * r_nm);
}

LatticeGeometry parse_geometry(std::string_view text) {
  LatticeGeometry geom;
  std::istringstream all{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(all, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream in(raw);
    std::string kind;
    if (!(in >> kind)) continue;
    if (kind == "J") {
      geom.couplings.push_back(parse_field(in, line, "coupling"));
    } else if (kind == "POS") {
      const double r = parse_field(in, line, "distance");
      const double theta = parse_field(in, line, "angle");
      const double j0 = parse_field(in, line, "J0");
      if (!(r > 0.0)) throw ParseError("source distance must be positive", line, 1);
      geom.couplings.push_back(positional_coupling(r, theta, j0));
    } else {
      throw ParseError("unknown geometry entry '" + kind + "'", line, 1);
    }
    std::string extra;
    if (in >> extra) throw ParseError("trailing text '" + extra + "'", line, 1);
  }
  return geom;
}

LatticeGeometry read_geometry_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open geometry file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_geometry(buf.str());
}

LatticeGeometry lattice_sources(const Lattice& lattice, const Vec3& probe_fractional, double j0,
                                double radius_nm, const Vec3& field) {
  if (!(radius_nm > 0.0)) throw InputError("radius must be positive");
  const Vec3 probe = lattice.vectors * probe_fractional;
  const Vec3 b = field.normalized();
  // Enough cells along each axis to cover the sphere: radius / (distance between lattice planes).
  const Mat3 inv = lattice.vectors.inverse();
  Eigen::Vector3i reach;
  for (int k = 0; k < 3; ++k) {
    reach(k) = static_cast<int>(std::ceil(radius_nm * inv.row(k).norm())) + 1;
  }
  LatticeGeometry geom;
  for (int i = -reach(0); i <= reach(0); ++i) {
    for (int j = -reach(1); j <= reach(1); ++j) {
      for (int k = -reach(2); k <= reach(2); ++k) {
        for (const Vec3& site : lattice.sites) {
          const Vec3 pos = lattice.vectors * (site + Vec3(i, j, k));
          const Vec3 d = pos - probe;
          const double r = d.norm();
          if (r < 1e-9 || r > radius_nm) continue;
          geom.couplings.push_back(positional_coupling(r, std::acos(std::clamp(d.dot(b) / r, -1.0, 1.0)), j0));
        }
      }
    }
  }
  return geom;
}

ThermalEnsemble::ThermalEnsemble(int two_s, double zeta) : two_s_(two_s), zeta_(zeta) {
  if (two_s < 1) throw InputError("spin must be a positive multiple of 1/2");
  if (!std::isfinite(zeta)) throw InputError("zeta must be finite");
}

ThermalEnsemble ThermalEnsemble::from_beta_omega(int two_s, double beta, double omega) {
  if (!std::isfinite(beta) || !std::isfinite(omega) || beta < 0.0) {
    throw InputError("beta must be finite and nonnegative, omega finite");
  }
  return ThermalEnsemble(two_s, beta * kHbar * omega / 2.0);
}

double DisorderStats::sigma() const { return std::sqrt(variance); }

DisorderStats analytic_moments(const LatticeGeometry& geom, const ThermalEnsemble& ens) {
  DisorderStats out;
  if (ens.zeta() == 0.0) {
    const double s = ens.spin();
    out.variance = s * (s + 1.0) / 3.0 * geom.sum_of_squares();
    return out;
  }
  if (ens.two_s() != 1) {
    throw InputError("finite-temperature moments are only defined for spin-1/2 sources");
  }
  const double z = ens.zeta();
  const double sech = 1.0 / std::cosh(z);
  out.mean = 0.5 * std::tanh(z) * geom.sum();
  out.variance = 0.25 * sech * sech * geom.sum_of_squares();
  return out;
}

FieldSamples mc_sample_field(const LatticeGeometry& geom, const ThermalEnsemble& ens,
                             std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw InputError("need at least one sample");
  if (ens.zeta() != 0.0 && ens.two_s() != 1) {
    throw InputError("finite-temperature sampling is only defined for spin-1/2 sources");
  }
  const std::size_t n_chunks = (n_samples + kChunkSize - 1) / kChunkSize;
  const int levels = ens.two_s() + 1;
  // Probability of I = +1/2 for the spin-1/2 Gibbs state.
  const double p_up = 1.0 / (1.0 + std::exp(-2.0 * ens.zeta()));

  const auto chunks = parallel_map<std::vector<double>>(n_chunks, [&](std::size_t c) {
    std::mt19937_64 rng(derive_stream_seed(seed, c));
    std::uniform_int_distribution<int> level(0, levels - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t begin = c * kChunkSize;
    const std::size_t end = std::min(n_samples, begin + kChunkSize);
    std::vector<double> out(end - begin);
    for (auto& h : out) {
      double sum = 0.0;
      for (double j : geom.couplings) {
        double m;
        if (ens.zeta() == 0.0) {
          m = level(rng) - ens.spin();
        } else {
          m = unit(rng) < p_up ? 0.5 : -0.5;
        }
        sum += j * m;
      }
      h = sum;
    }
    return out;
  });

  FieldSamples out;
  out.samples.reserve(n_samples);
  for (const auto& chunk : chunks) out.samples.insert(out.samples.end(), chunk.begin(), chunk.end());
  double mean = 0.0;
  for (double h : out.samples) mean += h;
  mean /= static_cast<double>(n_samples);
  double var = 0.0;
  for (double h : out.samples) var += (h - mean) * (h - mean);
  out.stats.mean = mean;
  out.stats.variance = n_samples > 1 ? var / static_cast<double>(n_samples - 1) : 0.0;
  return out;
}

Histogram histogram(const std::vector<double>& samples, int bins) {
  if (bins < 1) throw InputError("histogram needs at least one bin");
  if (samples.empty()) throw InputError("histogram needs samples");
  Histogram hist;
  hist.lo = *std::min_element(samples.begin(), samples.end());
  hist.hi = *std::max_element(samples.begin(), samples.end());
  if (hist.hi == hist.lo) {
    hist.lo -= 0.5;
    hist.hi += 0.5;
  }
  hist.counts.assign(static_cast<std::size_t>(bins), 0);
  const double width = (hist.hi - hist.lo) / bins;
  for (double x : samples) {
    auto k = static_cast<std::size_t>((x - hist.lo) / width);
    if (k >= hist.counts.size()) k = hist.counts.size() - 1;
    ++hist.counts[k];
  }
  return hist;
}

void write_histogram_csv(std::ostream& out, const Histogram& hist) {
  out << "bin_lo,bin_hi,count\n";
  out.precision(12);
  const double width = (hist.hi - hist.lo) / static_cast<double>(hist.counts.size());
  for (std::size_t k = 0; k < hist.counts.size(); ++k) {
    out << hist.lo + width * static_cast<double>(k) << ','
        << hist.lo + width * static_cast<double>(k + 1) << ',' << hist.counts[k] << '\n';
  }
}

double sample_skewness(const std::vector<double>& samples) {
  const double n = static_cast<double>(samples.size());
  if (samples.size() < 3) throw InputError("skewness needs at least 3 samples");
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0;
  for (double x : samples) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  return m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
}

SmallZeta small_zeta_expansion(const LatticeGeometry& geom, double zeta) {
  if (!(std::abs(zeta) < 0.1)) throw InputError("small-zeta expansion needs |zeta| < 0.1");
  return {zeta / 2.0 * geom.sum(), (1.0 - zeta * zeta) / 4.0 * geom.sum_of_squares()};
}

std::function<double(double)> characteristic_correlator(const FieldDistribution& dist) {
  constexpr double kScale = 1.4142135623730951 / 3.0 * kKradPerSecondToRadPerMicrosecond;
  if (const auto* g = std::get_if<field_distribution::Gaussian>(&dist)) {
    const double sigma = g->sigma;
    return [sigma](double t_us) {
      const double x = sigma * t_us * kKradPerSecondToRadPerMicrosecond;
      return 0.5 + 0.5 * std::exp(-x * x / 9.0);
    };
  }
  const auto samples = std::get<field_distribution::Empirical>(dist).samples;
  if (samples.empty()) throw InputError("empirical distribution has no samples");
  return [samples](double t_us) {
    double acc = 0.0;
    for (double h : samples) acc += std::cos(kScale * h * t_us);
    return 0.5 + 0.5 * acc / static_cast<double>(samples.size());
  };
}

}  // namespace framechange
