#include "framechange/spinsys.hpp"

#include <cmath>
#include <string>

#include "framechange/error.hpp"

namespace framechange {

namespace {

constexpr int kMaxSpins = 14;

// Action of sigma_axis on a single basis state: sigma |s> = amp |s'>.
struct BasisImage {
  Eigen::Index state;
  Complex amp;
};

BasisImage apply_pauli(Axis axis, int site, int n_spins, BasisImage in) {
  const Eigen::Index mask = Eigen::Index{1} << (n_spins - 1 - site);
  const bool down = (in.state & mask) != 0;
  switch (axis) {
    case Axis::X:
      return {in.state ^ mask, in.amp};
    case Axis::Y:
      return {in.state ^ mask, in.amp * (down ? Complex(0.0, -1.0) : Complex(0.0, 1.0))};
    case Axis::Z:
      return {in.state, down ? -in.amp : in.amp};
  }
  return in;
}

constexpr Axis kAxes[3] = {Axis::X, Axis::Y, Axis::Z};

void check_couplings(const SpinRegister& reg, const CouplingTable& j) {
  if (j.size() != reg.n_spins()) {
    throw InputError("coupling table is " + std::to_string(j.size()) + "x" +
                     std::to_string(j.size()) + " but the register has " +
                     std::to_string(reg.n_spins()) + " spins");
  }
}

}  // namespace

Vec3 axis_vector(Axis axis) {
  switch (axis) {
    case Axis::X:
      return Vec3::UnitX();
    case Axis::Y:
      return Vec3::UnitY();
    case Axis::Z:
      return Vec3::UnitZ();
  }
  return Vec3::Zero();
}

SpinRegister::SpinRegister(int n_spins) : n_spins_(n_spins) {
  if (n_spins < 1 || n_spins > kMaxSpins) {
    throw InputError("spin count must be in [1, " + std::to_string(kMaxSpins) + "], got " +
                     std::to_string(n_spins));
  }
}

CouplingTable::CouplingTable(Eigen::MatrixXd couplings) : j_(std::move(couplings)) {
  if (j_.rows() != j_.cols()) throw InputError("coupling table must be square");
  for (Eigen::Index i = 0; i < j_.rows(); ++i) {
    if (j_(i, i) != 0.0) throw InputError("coupling table diagonal must be zero");
    for (Eigen::Index k = 0; k < i; ++k) {
      if (!std::isfinite(j_(i, k))) throw InputError("coupling table entries must be finite");
      if (j_(i, k) != j_(k, i)) throw InputError("coupling table must be symmetric");
    }
  }
}

CouplingTable CouplingTable::chain(int n_spins, double j0) {
  if (n_spins < 1) throw InputError("chain needs at least one spin");
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n_spins, n_spins);
  for (int a = 0; a < n_spins; ++a) {
    for (int b = a + 1; b < n_spins; ++b) {
      const double d = b - a;
      j(a, b) = j(b, a) = j0 / (d * d * d);
    }
  }
  return CouplingTable(std::move(j));
}

DisorderRealization DisorderRealization::uniform(int n_spins, double field) {
  return DisorderRealization{std::vector<double>(static_cast<std::size_t>(n_spins), field)};
}

void DisorderRealization::validate(const SpinRegister& reg) const {
  if (static_cast<int>(h.size()) != reg.n_spins()) {
    throw InputError("disorder realization has " + std::to_string(h.size()) +
                     " fields for " + std::to_string(reg.n_spins()) + " spins");
  }
  for (double x : h) {
    if (!std::isfinite(x)) throw InputError("disorder fields must be finite");
  }
}

CMatrix site_op(const SpinRegister& reg, Axis axis, int site) {
  if (site < 0 || site >= reg.n_spins()) throw InputError("site index out of range");
  CMatrix op = CMatrix::Zero(reg.dim(), reg.dim());
  for (Eigen::Index s = 0; s < reg.dim(); ++s) {
    const BasisImage out = apply_pauli(axis, site, reg.n_spins(), {s, 1.0});
    op(out.state, s) += out.amp;
  }
  return op;
}

CMatrix collective_op(const SpinRegister& reg, Axis axis) {
  return field_matrix(reg, DisorderRealization::uniform(reg.n_spins(), 1.0), axis_vector(axis));
}

CMatrix two_body_matrix(const SpinRegister& reg, const CouplingTable& j, const Mat3& a) {
  check_couplings(reg, j);
  const int n = reg.n_spins();
  CMatrix h = CMatrix::Zero(reg.dim(), reg.dim());
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      const double jpq = j(p, q);
      if (jpq == 0.0) continue;
      for (int mu = 0; mu < 3; ++mu) {
        for (int nu = 0; nu < 3; ++nu) {
          const double coeff = jpq * a(mu, nu);
          if (coeff == 0.0) continue;
          for (Eigen::Index s = 0; s < reg.dim(); ++s) {
            BasisImage img = apply_pauli(kAxes[nu], q, n, {s, 1.0});
            img = apply_pauli(kAxes[mu], p, n, img);
            h(img.state, s) += coeff * img.amp;
          }
        }
      }
    }
  }
  return h;
}

CMatrix field_matrix(const SpinRegister& reg, const DisorderRealization& h, const Vec3& b) {
  h.validate(reg);
  const int n = reg.n_spins();
  CMatrix out = CMatrix::Zero(reg.dim(), reg.dim());
  for (int site = 0; site < n; ++site) {
    for (int mu = 0; mu < 3; ++mu) {
      const double coeff = h.h[static_cast<std::size_t>(site)] * b(mu);
      if (coeff == 0.0) continue;
      for (Eigen::Index s = 0; s < reg.dim(); ++s) {
        const BasisImage img = apply_pauli(kAxes[mu], site, n, {s, 1.0});
        out(img.state, s) += coeff * img.amp;
      }
    }
  }
  return out;
}

CMatrix dipolar_hamiltonian(const SpinRegister& reg, const CouplingTable& j, Axis axis) {
  const Vec3 n = axis_vector(axis);
  // (1/2)(3 n n^T - I): diag(-1/2, -1/2, 1) for z.
  const Mat3 a = 1.5 * n * n.transpose() - 0.5 * Mat3::Identity();
  return two_body_matrix(reg, j, a);
}

CMatrix hamiltonian_matrix(const SpinRegister& reg, const HamiltonianSpec& spec,
                           const CouplingTable& j, const DisorderRealization& h) {
  return std::visit(
      [&](const auto& s) -> CMatrix {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, hamiltonian::DipolarAxis>) {
          return dipolar_hamiltonian(reg, j, s.axis);
        } else if constexpr (std::is_same_v<T, hamiltonian::DisorderField>) {
          if (std::abs(s.direction.norm() - 1.0) > 1e-12) {
            throw InputError("disorder field direction must be a unit vector");
          }
          return field_matrix(reg, h, s.direction);
        } else if constexpr (std::is_same_v<T, hamiltonian::DoubleQuantum>) {
          const Mat3 a = Eigen::Vector3d(s.u / 2.0, -s.u / 2.0, 0.0).asDiagonal();
          return two_body_matrix(reg, j, a);
        } else {
          if ((s.a - s.a.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
            throw InputError("two-body coefficient matrix must be symmetric");
          }
          return two_body_matrix(reg, j, s.a) + field_matrix(reg, h, s.b);
        }
      },
      spec);
}

}  // namespace framechange
