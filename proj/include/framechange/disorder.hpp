#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "framechange/linalg.hpp"

namespace framechange {

// Couplings J_j (krad/s) between the probe spin and each classical source spin.
struct LatticeGeometry {
  std::vector<double> couplings;

  double sum() const;
  double sum_of_squares() const;
};

// J = (1 - 3 cos^2 theta) J0 / r^3 with r in nm and J0 in krad/s nm^3.
double positional_coupling(double r_nm, double theta_rad, double j0);

// One source per line: `J <krad/s>` or `POS <r nm> <theta rad> <J0 krad/s nm^3>`; '#' comments.
LatticeGeometry parse_geometry(std::string_view text);
LatticeGeometry read_geometry_file(const std::string& path);

// Periodic crystal: lattice vectors as columns (nm) and source sites in fractional coordinates.
struct Lattice {
  Mat3 vectors;
  std::vector<Vec3> sites;
};

// All sources within radius_nm of the probe (probe excluded), field along `field`.
LatticeGeometry lattice_sources(const Lattice& lattice, const Vec3& probe_fractional,
                                double j0, double radius_nm, const Vec3& field = Vec3::UnitZ());

// Thermal state of the source spins. zeta = beta hbar omega / 2; beta = 0 gives zeta = 0.
class ThermalEnsemble {
 public:
  static constexpr double kHbar = 1.054571817e-34;  // J s

  // two_s = 2s (1 for spin-1/2).
  ThermalEnsemble(int two_s, double zeta);
  static ThermalEnsemble infinite_temperature(int two_s) { return ThermalEnsemble(two_s, 0.0); }
  // beta in 1/J, omega in rad/s.
  static ThermalEnsemble from_beta_omega(int two_s, double beta, double omega);

  int two_s() const noexcept { return two_s_; }
  double spin() const noexcept { return two_s_ / 2.0; }
  double zeta() const noexcept { return zeta_; }

 private:
  int two_s_;
  double zeta_;
};

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> counts;
};

// Field statistics in krad/s.
struct DisorderStats {
  double mean = 0.0;
  double variance = 0.0;
  double sigma() const;
};

// Infinite temperature: mean 0, variance s(s+1)/3 sum J^2. Finite temperature (spin-1/2 only):
// mean tanh(zeta)/2 sum J, variance sech^2(zeta)/4 sum J^2.
DisorderStats analytic_moments(const LatticeGeometry& geom, const ThermalEnsemble& ens);

struct FieldSamples {
  std::vector<double> samples;  // krad/s
  DisorderStats stats;          // empirical, variance with 1/(n-1)
};

// h = sum_j J_j I_j with I_j drawn uniformly from {-s..s} (zeta = 0) or from the spin-1/2 Gibbs
// weights. Sampling runs in fixed-size chunks with per-chunk RNG streams.
FieldSamples mc_sample_field(const LatticeGeometry& geom, const ThermalEnsemble& ens,
                             std::size_t n_samples, std::uint64_t seed);

Histogram histogram(const std::vector<double>& samples, int bins);
void write_histogram_csv(std::ostream& out, const Histogram& hist);

double sample_skewness(const std::vector<double>& samples);

struct SmallZeta {
  double mean;
  double variance;
};

// First terms in zeta of the spin-1/2 finite-temperature moments; |zeta| < 0.1.
SmallZeta small_zeta_expansion(const LatticeGeometry& geom, double zeta);

namespace field_distribution {
struct Gaussian {
  double sigma;  // krad/s
};
struct Empirical {
  std::vector<double> samples;  // krad/s
};
}  // namespace field_distribution

using FieldDistribution = std::variant<field_distribution::Gaussian, field_distribution::Empirical>;

// t (us) -> 1/2 + (1/2) Re phi_X(sqrt(2) t / 3), the disorder-averaged MREV correlator.
std::function<double(double)> characteristic_correlator(const FieldDistribution& dist);

}  // namespace framechange
