#include "framechange/linalg.hpp"

#include <cmath>

#include "framechange/error.hpp"

namespace framechange {

namespace {

CMatrix exp_from_eigensystem(const Eigen::VectorXd& values, const CMatrix& vectors, double t) {
  Eigen::VectorXcd phases(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    phases(k) = std::exp(Complex(0.0, -values(k) * t));
  }
  return vectors * phases.asDiagonal() * vectors.adjoint();
}

}  // namespace

CMatrix expm_hermitian(const CMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigendecomposition failed");
  }
  return exp_from_eigensystem(solver.eigenvalues(), solver.eigenvectors(), t);
}

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

double max_abs(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

double phase_aligned_distance(const CMatrix& u, const CMatrix& v) {
  const Complex overlap = (v.adjoint() * u).trace();
  const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0);
  return spectral_norm(u - phase * v);
}

double unitarity_error(const CMatrix& u) {
  return max_abs(u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols()));
}

Mat3 so3_rotation(const Vec3& axis, double angle_rad) {
  return Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
}

Mat2c su2_rotation(const Vec3& axis, double angle_rad) {
  const Vec3 n = axis.normalized();
  const double c = std::cos(angle_rad / 2.0);
  const double s = std::sin(angle_rad / 2.0);
  const Complex i(0.0, 1.0);
  Mat2c r;
  r(0, 0) = c - i * s * n.z();
  r(0, 1) = -i * s * (n.x() - i * n.y());
  r(1, 0) = -i * s * (n.x() + i * n.y());
  r(1, 1) = c + i * s * n.z();
  return r;
}

void apply_on_every_site(CMatrix& u, const Mat2c& op, int n_spins) {
  const Eigen::Index dim = u.rows();
  for (int site = 0; site < n_spins; ++site) {
    const Eigen::Index mask = Eigen::Index{1} << (n_spins - 1 - site);
    for (Eigen::Index r0 = 0; r0 < dim; ++r0) {
      if (r0 & mask) continue;
      const Eigen::Index r1 = r0 | mask;
      for (Eigen::Index c = 0; c < u.cols(); ++c) {
        const Complex a = u(r0, c);
        const Complex b = u(r1, c);
        u(r0, c) = op(0, 0) * a + op(0, 1) * b;
        u(r1, c) = op(1, 0) * a + op(1, 1) * b;
      }
    }
  }
}

CMatrix tensor_power(const Mat2c& op, int n_spins) {
  const Eigen::Index dim = Eigen::Index{1} << n_spins;
  CMatrix out = CMatrix::Identity(dim, dim);
  apply_on_every_site(out, op, n_spins);
  return out;
}

HermitianPropagator::HermitianPropagator(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigendecomposition failed");
  }
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
}

const CMatrix& HermitianPropagator::evolve(double t) {
  auto it = cache_.find(t);
  if (it == cache_.end()) {
    it = cache_.emplace(t, exp_from_eigensystem(eigenvalues_, eigenvectors_, t)).first;
  }
  return it->second;
}

}  // namespace framechange
