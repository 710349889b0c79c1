#pragma once

#include <vector>

#include "framechange/linalg.hpp"
#include "framechange/pulseprog.hpp"

namespace framechange {

// Cumulative rotation R_k of the k-th inter-pulse interval and its free-evolution time. The
// toggling-frame image of a coefficient vector v is R_k^T v, of a coefficient matrix R_k^T M R_k.
struct ToggleFrame {
  Mat3 rotation;
  double dwell_us;
};

// Zeroth-order average Hamiltonian in coefficient space:
//   H = (1/2) sum_{i<j} J_ij sum_mn A_mn S_m^i S_n^j + sum_i h_i b.S^i,
// so the bare secular dipolar term about z has A = diag(-1, -1, 2) and the bare field b = z.
struct AverageHamiltonian {
  Mat3 a = Mat3::Zero();
  Vec3 b = Vec3::Zero();
  double period_us = 0.0;
  Mat3 final_frame = Mat3::Identity();
};

// Secular dipolar coefficient matrix in the normalization above.
Mat3 secular_dipolar_coefficients();

// Delta-pulse toggling frames; one entry per pulse plus one. VirtualZ and transient events rotate
// the frame without starting a new interval. Deflected pulses use their exact tilted axis.
std::vector<ToggleFrame> toggling_frames(const PulseProgram& p);

AverageHamiltonian average_hamiltonian(const PulseProgram& p);

// Minimal-norm (u, v, w) with (u - w, v - u, w - v) = (u_target, -u_target, 0), a = b = c = 0.
// Throws ConstraintError when the resulting delays do not fit pulses of width tp.
Wei16Params solve_wei16_for_dq(double u_target, double tau0_us, double tp_us);

}  // namespace framechange
