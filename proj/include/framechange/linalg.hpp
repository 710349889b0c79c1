#pragma once

#include <complex>
#include <cstddef>
#include <map>

#include <Eigen/Dense>

namespace framechange {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using Mat2c = Eigen::Matrix2cd;
using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Couplings and fields are angular frequencies in krad/s, times are in microseconds.
inline constexpr double kKradPerSecondToRadPerMicrosecond = 1e-3;

// exp(-i H t) for Hermitian H.
CMatrix expm_hermitian(const CMatrix& h, double t);

// Largest singular value.
double spectral_norm(const CMatrix& m);

double max_abs(const CMatrix& m);

// ||u - e^{i a} v||_2 with the phase a = arg Tr(v^dagger u).
double phase_aligned_distance(const CMatrix& u, const CMatrix& v);

// Deviation from unitarity, max |U^dagger U - I|.
double unitarity_error(const CMatrix& u);

// Right-handed rotation of 3-vectors about `axis` (normalized internally).
Mat3 so3_rotation(const Vec3& axis, double angle_rad);

// exp(-i (angle/2) n.sigma) for a single spin-1/2.
Mat2c su2_rotation(const Vec3& axis, double angle_rad);

// Left-multiplies `u` by the same single-spin operator on every site of an n-spin register
// (site 0 is the most significant bit). Equivalent to (op x op x ... x op) * u.
void apply_on_every_site(CMatrix& u, const Mat2c& op, int n_spins);

// Dense tensor power op^{x n}.
CMatrix tensor_power(const Mat2c& op, int n_spins);

// Eigendecomposition of a fixed Hermitian generator, reused for many evolution times.
class HermitianPropagator {
 public:
  explicit HermitianPropagator(const CMatrix& h);

  // exp(-i H t); memoized on the exact value of t.
  const CMatrix& evolve(double t);

  Eigen::Index dim() const { return eigenvectors_.rows(); }

 private:
  Eigen::VectorXd eigenvalues_;
  CMatrix eigenvectors_;
  std::map<double, CMatrix> cache_;
};

}  // namespace framechange
