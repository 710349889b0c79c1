#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "framechange/linalg.hpp"

namespace framechange {

enum class Axis { X, Y, Z };

Vec3 axis_vector(Axis axis);

// Register of n spin-1/2 sites. Basis states are ordered with site 0 as the most significant
// bit, |0> = spin up (sigma_z = +1), matching the Kronecker ordering sigma^(0) x sigma^(1) x ...
class SpinRegister {
 public:
  explicit SpinRegister(int n_spins);

  int n_spins() const noexcept { return n_spins_; }
  Eigen::Index dim() const noexcept { return Eigen::Index{1} << n_spins_; }

  friend bool operator==(const SpinRegister&, const SpinRegister&) = default;

 private:
  int n_spins_;
};

// Symmetric pair couplings J_ij in krad/s, zero diagonal.
class CouplingTable {
 public:
  static constexpr double kDefaultJ0 = -33.0;

  explicit CouplingTable(Eigen::MatrixXd couplings);

  // Open chain with J_ij = j0 / |i - j|^3 for all pairs.
  static CouplingTable chain(int n_spins, double j0 = kDefaultJ0);

  int size() const noexcept { return static_cast<int>(j_.rows()); }
  double operator()(int i, int j) const { return j_(i, j); }
  const Eigen::MatrixXd& matrix() const noexcept { return j_; }

 private:
  Eigen::MatrixXd j_;
};

// Per-spin longitudinal fields h_i in krad/s.
struct DisorderRealization {
  std::vector<double> h;

  static DisorderRealization uniform(int n_spins, double field);
  static DisorderRealization zero(int n_spins) { return uniform(n_spins, 0.0); }

  // Throws InputError when the length does not match or an entry is not finite.
  void validate(const SpinRegister& reg) const;
};

namespace hamiltonian {

struct DipolarAxis {
  Axis axis;
};

struct DisorderField {
  Vec3 direction;  // unit norm
};

struct DoubleQuantum {
  double u;
};

// sum_{i<j} J_ij sum_{mn} A_mn S_m^i S_n^j + sum_i h_i b.S^i
struct GeneralTwoBody {
  Mat3 a;
  Vec3 b;
};

}  // namespace hamiltonian

using HamiltonianSpec = std::variant<hamiltonian::DipolarAxis, hamiltonian::DisorderField,
                                     hamiltonian::DoubleQuantum, hamiltonian::GeneralTwoBody>;

// sigma_axis on one site.
CMatrix site_op(const SpinRegister& reg, Axis axis, int site);

// S_axis = sum_i sigma_axis^(i), Pauli convention (eigenvalues +-1 per spin).
CMatrix collective_op(const SpinRegister& reg, Axis axis);

// Secular dipolar Hamiltonian about `axis`:
// (1/2) sum_{i<j} J_ij (2 S_a^i S_a^j - S_b^i S_b^j - S_c^i S_c^j), (a,b,c) cyclic.
CMatrix dipolar_hamiltonian(const SpinRegister& reg, const CouplingTable& j, Axis axis);

CMatrix hamiltonian_matrix(const SpinRegister& reg, const HamiltonianSpec& spec,
                           const CouplingTable& j, const DisorderRealization& h);

// Hermitian part of a two-body coefficient contraction; shared by the simulator.
CMatrix two_body_matrix(const SpinRegister& reg, const CouplingTable& j, const Mat3& a);
CMatrix field_matrix(const SpinRegister& reg, const DisorderRealization& h, const Vec3& b);

}  // namespace framechange
