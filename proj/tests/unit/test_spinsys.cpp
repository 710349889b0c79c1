#include <random>

#include "doctest.h"
#include "framechange/error.hpp"
#include "framechange/spinsys.hpp"
#include "oracle.hpp"

using namespace framechange;

namespace {

CMatrix dipolar_oracle(const CouplingTable& j, char a, char b, char c, int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMatrix h = CMatrix::Zero(dim, dim);
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      auto pair = [&](char ax) -> CMatrix {
        return oracle::embed(oracle::pauli(ax), p, n) * oracle::embed(oracle::pauli(ax), q, n);
      };
      h += 0.5 * j(p, q) * (2.0 * pair(a) - pair(b) - pair(c));
    }
  }
  return h;
}

CouplingTable random_couplings(int n, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 20.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) m(i, k) = m(k, i) = g(rng);
  return CouplingTable(m);
}

double hermiticity_error(const CMatrix& h) { return max_abs(h - h.adjoint()); }

}  // namespace

TEST_CASE("collective operators") {
  CHECK(max_abs(collective_op(SpinRegister(1), Axis::Z) - oracle::pauli('z')) == 0.0);

  CMatrix z2 = CMatrix::Zero(4, 4);
  z2.diagonal() << 2.0, 0.0, 0.0, -2.0;
  CHECK(max_abs(collective_op(SpinRegister(2), Axis::Z) - z2) == 0.0);

  const CMatrix sx3 = collective_op(SpinRegister(3), Axis::X);
  CHECK(std::abs(sx3.trace()) < 1e-12);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sx3);
  const Eigen::VectorXd expected = (Eigen::VectorXd(8) << -3, -1, -1, -1, 1, 1, 1, 3).finished();
  CHECK((es.eigenvalues() - expected).cwiseAbs().maxCoeff() < 1e-12);

  for (int n = 1; n <= 4; ++n) {
    for (char ax : {'x', 'y', 'z'}) {
      const Axis axis = ax == 'x' ? Axis::X : ax == 'y' ? Axis::Y : Axis::Z;
      CHECK(max_abs(collective_op(SpinRegister(n), axis) - oracle::collective(ax, n)) < 1e-14);
      for (int site = 0; site < n; ++site) {
        CHECK(max_abs(site_op(SpinRegister(n), axis, site) -
                      oracle::embed(oracle::pauli(ax), site, n)) < 1e-14);
      }
    }
  }
}

TEST_CASE("register and coupling validation") {
  CHECK_THROWS_AS(SpinRegister(0), InputError);
  CHECK(SpinRegister(10).dim() == 1024);

  const CouplingTable chain = CouplingTable::chain(5);
  for (int i = 0; i < 5; ++i) {
    CHECK(chain(i, i) == 0.0);
    for (int k = 0; k < 5; ++k) {
      CHECK(chain(i, k) == chain(k, i));
      if (i != k) {
        const double d = std::abs(i - k);
        CHECK(chain(i, k) == CouplingTable::kDefaultJ0 / (d * d * d));
      }
    }
  }

  Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(2, 2);
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(CouplingTable{asym}, InputError);
  Eigen::MatrixXd diag = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(CouplingTable{diag}, InputError);

  CHECK_THROWS_AS(dipolar_hamiltonian(SpinRegister(3), CouplingTable::chain(2), Axis::Z),
                  InputError);
  CHECK_THROWS_AS(DisorderRealization::zero(2).validate(SpinRegister(3)), InputError);
  DisorderRealization bad{{0.0, std::nan("")}};
  CHECK_THROWS_AS(bad.validate(SpinRegister(2)), InputError);
}

TEST_CASE("dipolar Hamiltonian matches the Kronecker construction") {
  CHECK(max_abs(dipolar_hamiltonian(SpinRegister(1), CouplingTable::chain(1), Axis::Z)) == 0.0);

  CMatrix hand = CMatrix::Zero(4, 4);
  // J = 1: (1/2)(2 ZZ - XX - YY) written out in the basis |00>, |01>, |10>, |11>.
  hand(0, 0) = hand(3, 3) = 1.0;
  hand(1, 1) = hand(2, 2) = -1.0;
  hand(1, 2) = hand(2, 1) = -1.0;
  const CMatrix h = dipolar_hamiltonian(SpinRegister(2), CouplingTable::chain(2, 1.0), Axis::Z);
  CHECK(max_abs(h - hand) < 1e-14);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const Eigen::VectorXd expected = (Eigen::VectorXd(4) << -2, 0, 1, 1).finished();
  CHECK((es.eigenvalues() - expected).cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937 rng(3);
  for (int n = 2; n <= 5; ++n) {
    const SpinRegister reg(n);
    const CouplingTable j = random_couplings(n, rng);
    CHECK(max_abs(dipolar_hamiltonian(reg, j, Axis::Z) - dipolar_oracle(j, 'z', 'x', 'y', n)) <
          1e-12);
    CHECK(max_abs(dipolar_hamiltonian(reg, j, Axis::X) - dipolar_oracle(j, 'x', 'y', 'z', n)) <
          1e-12);
    CHECK(max_abs(dipolar_hamiltonian(reg, j, Axis::Y) - dipolar_oracle(j, 'y', 'z', 'x', n)) <
          1e-12);
  }
}

TEST_CASE("Hamiltonian invariants") {
  std::mt19937 rng(11);
  for (int n = 1; n <= 6; ++n) {
    const SpinRegister reg(n);
    const CouplingTable j = random_couplings(n, rng);
    DisorderRealization h;
    std::normal_distribution<double> g(0.0, 6.0);
    for (int k = 0; k < n; ++k) h.h.push_back(g(rng));

    const CMatrix hx = dipolar_hamiltonian(reg, j, Axis::X);
    const CMatrix hy = dipolar_hamiltonian(reg, j, Axis::Y);
    const CMatrix hz = dipolar_hamiltonian(reg, j, Axis::Z);
    CHECK(max_abs(hx + hy + hz) < 1e-12);

    const std::vector<HamiltonianSpec> specs = {
        hamiltonian::DipolarAxis{Axis::Z}, hamiltonian::DoubleQuantum{0.7},
        hamiltonian::DisorderField{Vec3(1.0, 0.0, 1.0).normalized()},
        hamiltonian::GeneralTwoBody{Mat3::Identity(), Vec3(0.1, 0.2, 0.3)}};
    for (const auto& spec : specs) {
      const CMatrix m = hamiltonian_matrix(reg, spec, j, h);
      CHECK(m.rows() == reg.dim());
      CHECK(hermiticity_error(m) < 1e-12);
      CHECK(std::abs(m.trace()) < 1e-9);
    }

    // U = exp(-i (pi/2) S_x / 2) maps sigma_z -> sigma_y on every site.
    const CMatrix u = oracle::expm(Complex(0.0, -kPi / 4.0) * collective_op(reg, Axis::X));
    CHECK(max_abs(u.adjoint() * hz * u - hy) < 1e-10);
  }
}

TEST_CASE("hamiltonian_matrix variants") {
  const SpinRegister reg(3);
  const CouplingTable j = CouplingTable::chain(3);
  const DisorderRealization h = DisorderRealization::uniform(3, 2.5);

  CHECK(max_abs(hamiltonian_matrix(reg, hamiltonian::DoubleQuantum{0.0}, j, h)) == 0.0);

  const CMatrix field =
      hamiltonian_matrix(reg, hamiltonian::DisorderField{Vec3(1.0, 0.0, 1.0) / std::sqrt(2.0)}, j, h);
  const CMatrix expected =
      (2.5 / std::sqrt(2.0)) * (collective_op(reg, Axis::X) + collective_op(reg, Axis::Z));
  CHECK(max_abs(field - expected) < 1e-14);

  const Mat3 az = Vec3(-0.5, -0.5, 1.0).asDiagonal();
  CHECK(max_abs(hamiltonian_matrix(reg, hamiltonian::GeneralTwoBody{az, Vec3::Zero()}, j, h) -
                dipolar_hamiltonian(reg, j, Axis::Z)) < 1e-14);

  // DQ: (u/2) sum J (XX - YY) against the Kronecker construction.
  CMatrix dq = CMatrix::Zero(8, 8);
  for (int p = 0; p < 3; ++p)
    for (int q = p + 1; q < 3; ++q)
      dq += 0.35 * j(p, q) *
            (oracle::embed(oracle::pauli('x'), p, 3) * oracle::embed(oracle::pauli('x'), q, 3) -
             oracle::embed(oracle::pauli('y'), p, 3) * oracle::embed(oracle::pauli('y'), q, 3));
  CHECK(max_abs(hamiltonian_matrix(reg, hamiltonian::DoubleQuantum{0.7}, j, h) - dq) < 1e-13);

  CHECK_THROWS_AS(hamiltonian_matrix(reg, hamiltonian::DisorderField{Vec3(1.0, 0.0, 1.0)}, j, h),
                  InputError);
  Mat3 asym = Mat3::Zero();
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(hamiltonian_matrix(reg, hamiltonian::GeneralTwoBody{asym, Vec3::Zero()}, j, h),
                  InputError);
}
