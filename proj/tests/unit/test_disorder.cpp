#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "framechange/disorder.hpp"
#include "framechange/dynamics.hpp"
#include "framechange/error.hpp"

using namespace framechange;

namespace {

std::string data_path(const std::string& rel) {
  const char* dir = std::getenv("FRAMECHANGE_DATA_DIR");
  return std::string(dir ? dir : "data") + "/" + rel;
}

LatticeGeometry random_geometry(std::mt19937& rng) {
  std::uniform_int_distribution<int> count(5, 50);
  std::normal_distribution<double> g(0.0, 3.0);
  LatticeGeometry geom;
  const int n = count(rng);
  for (int k = 0; k < n; ++k) geom.couplings.push_back(g(rng));
  return geom;
}

}  // namespace

TEST_CASE("analytic moments") {
  const LatticeGeometry one{{4.0}};
  DisorderStats s = analytic_moments(one, ThermalEnsemble::infinite_temperature(1));
  CHECK(s.mean == 0.0);
  CHECK(s.variance == doctest::Approx(4.0));
  CHECK(analytic_moments(one, ThermalEnsemble::infinite_temperature(2)).variance ==
        doctest::Approx(2.0 / 3.0 * 16.0));
  CHECK(analytic_moments(one, ThermalEnsemble::infinite_temperature(3)).variance ==
        doctest::Approx(1.25 * 16.0));

  // beta = 0 in the finite-temperature route reproduces the infinite-temperature result exactly.
  const LatticeGeometry geom{{1.0, -2.0, 3.5}};
  const ThermalEnsemble zero = ThermalEnsemble::from_beta_omega(1, 0.0, 2.0 * kPi * 300e6);
  CHECK(zero.zeta() == 0.0);
  CHECK(analytic_moments(geom, zero).variance ==
        analytic_moments(geom, ThermalEnsemble::infinite_temperature(1)).variance);

  const ThermalEnsemble warm(1, 0.3);
  s = analytic_moments(geom, warm);
  CHECK(s.mean == doctest::Approx(0.5 * std::tanh(0.3) * 2.5));
  CHECK(s.variance == doctest::Approx(0.25 / std::pow(std::cosh(0.3), 2) * geom.sum_of_squares()));
  CHECK(s.sigma() == doctest::Approx(std::sqrt(s.variance)));
  CHECK_THROWS_AS(analytic_moments(geom, ThermalEnsemble(2, 0.3)), InputError);
  CHECK_THROWS_AS(ThermalEnsemble(0, 0.0), InputError);
  CHECK_THROWS_AS(ThermalEnsemble::from_beta_omega(1, -1.0, 1.0), InputError);

  const ThermalEnsemble lab = ThermalEnsemble::from_beta_omega(1, 1.0 / (1.380649e-23 * 300.0), 2.0 * kPi * 300e6);
  CHECK(lab.zeta() == doctest::Approx(2.4e-5).epsilon(0.01));
}

TEST_CASE("Monte Carlo sampling") {
  const LatticeGeometry one{{3.0}};
  const FieldSamples s = mc_sample_field(one, ThermalEnsemble::infinite_temperature(1), 1000, 4);
  for (double h : s.samples) CHECK((h == 1.5 || h == -1.5));
  const FieldSamples spin1 = mc_sample_field(one, ThermalEnsemble::infinite_temperature(2), 1000, 4);
  for (double h : spin1.samples) CHECK((h == 3.0 || h == 0.0 || h == -3.0));

  CHECK(mc_sample_field(one, ThermalEnsemble(1, 0.2), 10, 1).samples ==
        mc_sample_field(one, ThermalEnsemble(1, 0.2), 10, 1).samples);
  CHECK(mc_sample_field(one, ThermalEnsemble(1, 0.2), 20000, 1).samples !=
        mc_sample_field(one, ThermalEnsemble(1, 0.2), 20000, 2).samples);
  CHECK_THROWS_AS(mc_sample_field(one, ThermalEnsemble::infinite_temperature(1), 0, 1), InputError);
  CHECK_THROWS_AS(mc_sample_field(one, ThermalEnsemble(3, 0.1), 10, 1), InputError);

  // Chunked streams: a prefix of a longer run equals the shorter run, independent of threading.
  const LatticeGeometry geom{{1.0, 2.0, -0.5}};
  setenv("FRAMECHANGE_THREADS", "1", 1);
  const auto serial = mc_sample_field(geom, ThermalEnsemble::infinite_temperature(1), 20000, 9).samples;
  setenv("FRAMECHANGE_THREADS", "3", 1);
  const auto threaded = mc_sample_field(geom, ThermalEnsemble::infinite_temperature(1), 20000, 9).samples;
  unsetenv("FRAMECHANGE_THREADS");
  CHECK(serial == threaded);
  const auto longer = mc_sample_field(geom, ThermalEnsemble::infinite_temperature(1), 30000, 9).samples;
  CHECK(std::equal(serial.begin(), serial.end(), longer.begin()));
}

TEST_CASE("Monte Carlo moments match the analytic moments") {
  std::mt19937 rng(31);
  const std::size_t n = 100000;
  for (int trial = 0; trial < 6; ++trial) {
    const LatticeGeometry geom = random_geometry(rng);
    for (const ThermalEnsemble& ens :
         {ThermalEnsemble::infinite_temperature(1), ThermalEnsemble::infinite_temperature(2),
          ThermalEnsemble::infinite_temperature(3), ThermalEnsemble(1, 0.4)}) {
      const DisorderStats exact = analytic_moments(geom, ens);
      const FieldSamples mc = mc_sample_field(geom, ens, n, 100 + static_cast<std::uint64_t>(trial));
      CHECK(std::abs(mc.stats.mean - exact.mean) < 4.0 * exact.sigma() / std::sqrt(double(n)));
      CHECK(std::abs(mc.stats.variance - exact.variance) < 4.0 * exact.variance * std::sqrt(2.0 / double(n)));
      if (ens.zeta() == 0.0) CHECK(std::abs(sample_skewness(mc.samples)) < 5.0 / std::sqrt(double(n)));
    }
  }
}

TEST_CASE("histogram") {
  const Histogram h = histogram({0.0, 0.1, 0.9, 1.0}, 2);
  CHECK(h.lo == 0.0);
  CHECK(h.hi == 1.0);
  CHECK(h.counts == std::vector<std::uint64_t>{2, 2});
  CHECK(histogram({2.0, 2.0}, 3).counts == std::vector<std::uint64_t>{0, 2, 0});
  CHECK_THROWS_AS(histogram({}, 3), InputError);
  std::ostringstream csv;
  write_histogram_csv(csv, h);
  CHECK(csv.str() == "bin_lo,bin_hi,count\n0,0.5,2\n0.5,1,2\n");
}

TEST_CASE("small-zeta expansion") {
  const LatticeGeometry geom{{3.0, -1.0, 2.0, 4.0}};
  const SmallZeta z0 = small_zeta_expansion(geom, 0.0);
  CHECK(z0.mean == 0.0);
  CHECK(z0.variance == doctest::Approx(geom.sum_of_squares() / 4.0));
  const double zeta = 0.01;
  const SmallZeta approx = small_zeta_expansion(geom, zeta);
  const DisorderStats exact = analytic_moments(geom, ThermalEnsemble(1, zeta));
  CHECK(std::abs(approx.mean - exact.mean) / std::abs(exact.mean) < zeta * zeta);
  CHECK(std::abs(approx.variance - exact.variance) / exact.variance < zeta * zeta);
  CHECK_THROWS_AS(small_zeta_expansion(geom, 0.2), InputError);

  // Sum of couplings 19 krad/s at zeta = 1.5e-6 gives a mean near 0.015 rad/s.
  const SmallZeta rounded = small_zeta_expansion(LatticeGeometry{{19.0}}, 1.5e-6);
  CHECK(rounded.mean * 1e3 == doctest::Approx(0.01425));
}

TEST_CASE("characteristic correlator") {
  const auto gauss = characteristic_correlator(field_distribution::Gaussian{6.069});
  CHECK(gauss(0.0) == 1.0);
  CHECK(gauss(1e5) == doctest::Approx(0.5));
  CHECK(gauss(300.0) == doctest::Approx(0.5 + 0.5 * std::exp(-std::pow(6.069e-3 * 300.0, 2) / 9.0)));

  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 6.069);
  std::vector<double> samples(20000);
  for (auto& h : samples) h = g(rng);
  const auto emp = characteristic_correlator(field_distribution::Empirical{samples});
  CHECK(emp(0.0) == 1.0);
  for (double t : {100.0, 300.0, 600.0, 1200.0}) {
    // Standard error of 0.5 * mean(cos) is below 0.5 / sqrt(n).
    CHECK(std::abs(emp(t) - gauss(t)) < 3.0 * 0.5 / std::sqrt(double(samples.size())));
  }
  CHECK_THROWS_AS(characteristic_correlator(field_distribution::Empirical{{}}), InputError);
}

TEST_CASE("empirical correlator agrees with the simulated single-spin MREV run") {
  const LatticeGeometry geom = read_geometry_file(data_path("geometry/fluorapatite_27cell.geom"));
  const FieldSamples mc = mc_sample_field(geom, ThermalEnsemble::infinite_temperature(1), 400, 3);
  const auto predicted = characteristic_correlator(field_distribution::Empirical{mc.samples});

  const PulseProgram p = build_sequence(SequenceName::Mrev8, 0.05, 0.0);
  std::vector<double> avg;
  std::vector<double> times;
  for (double h : mc.samples) {
    SimConfig cfg;
    cfg.disorder = DisorderRealization{{h}};
    cfg.program = p;
    cfg.n_cycles = 1000;
    const Trajectory c = autocorrelator(cfg, Axis::Z);
    if (avg.empty()) {
      avg.assign(c.values.size(), 0.0);
      times = c.times_us;
    }
    for (std::size_t k = 0; k < avg.size(); k += 1) avg[k] += c.values[k] / double(mc.samples.size());
  }
  double sse = 0.0;
  for (std::size_t k = 0; k < avg.size(); ++k) sse += std::pow(avg[k] - predicted(times[k]), 2);
  CHECK(std::sqrt(sse / double(avg.size())) < 0.02);
}

TEST_CASE("geometry files") {
  const LatticeGeometry g = parse_geometry("# comment\nJ 2.5\n\nPOS 0.5 0 1.0  # on axis\nJ -1\n");
  REQUIRE(g.couplings.size() == 3);
  CHECK(g.couplings[0] == 2.5);
  CHECK(g.couplings[1] == doctest::Approx(-2.0 / 0.125));
  CHECK(g.sum() == doctest::Approx(2.5 - 16.0 - 1.0));
  CHECK(std::abs(positional_coupling(1.0, std::acos(1.0 / std::sqrt(3.0)), 5.0)) < 1e-14);

  auto line_of = [](const char* text) {
    try {
      parse_geometry(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("J 1\nK 2\n") == 2);
  CHECK(line_of("J\n") == 1);
  CHECK(line_of("J 1\nJ abc\n") == 2);
  CHECK(line_of("J 1\n\nPOS 0 0 1\n") == 3);
  CHECK(line_of("J 1 2\n") == 1);
  CHECK(line_of("POS 1 0\n") == 1);
  CHECK_THROWS_AS(read_geometry_file("/nonexistent/geom"), InputError);

  const LatticeGeometry shipped = read_geometry_file(data_path("geometry/fluorapatite_27cell.geom"));
  CHECK(shipped.couplings.size() == 162);
  const double sigma = analytic_moments(shipped, ThermalEnsemble::infinite_temperature(1)).sigma();
  CHECK(std::abs(sigma - 5.848) / 5.848 < 0.05);
}

TEST_CASE("lattice sums converge with the truncation radius") {
  Lattice cubic{Mat3::Identity() * 0.5, {Vec3::Zero()}};
  const Vec3 probe(0.5, 0.5, 0.5);
  for (double r : {5.0, 6.0}) {
    const double s1 = analytic_moments(lattice_sources(cubic, probe, 1.0, r), ThermalEnsemble::infinite_temperature(1)).sigma();
    const double s2 = analytic_moments(lattice_sources(cubic, probe, 1.0, 2.0 * r), ThermalEnsemble::infinite_temperature(1)).sigma();
    CHECK(std::abs(s2 - s1) / s2 < 1e-3);
  }
  // The nearest source sits on the body diagonal of the probe's cell, sqrt(3)/4 nm away.
  const LatticeGeometry near = lattice_sources(cubic, probe, 1.0, 0.45);
  CHECK(near.couplings.size() == 8);
  CHECK_THROWS_AS(lattice_sources(cubic, probe, 1.0, 0.0), InputError);
}
