#pragma once

#include <stdexcept>
#include <vector>

#include "rtucker/tucker.hpp"

namespace rtucker {

// Raised when the tangent space at a point is undefined because some core
// matricization is numerically rank-deficient.
struct degenerate_point_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structured tangent-space element at a Tucker point. Dense form:
//   core_dot x_1 U_1 ... x_m U_m + sum_k core x_1 U_1 ... x_k arm_k ... x_m U_m
// with U_k^T arm_k = 0, which makes the terms mutually orthogonal.
struct TangentVector {
  TuckerFactors base;
  DenseTensor core_dot;        // dims (r_1..r_m)
  std::vector<Matrix> arms;    // arm k: d_k x r_k

  // Frobenius norm of the dense form, computed from the structure.
  double norm() const;
};

// Step schedule: geometrically decaying eta0*q^l in phase one, constant eta
// in phase two. The switch happens at a fixed iteration when fixed_l1 >= 0,
// otherwise when the loss decrease over a sliding window stagnates.
struct StepSchedule {
  double eta0 = -1.0;        // < 0: resolved from data scale at solve time
  double q = 0.93;
  double eta_const = -1.0;   // < 0: resolved from residual scale at the switch
  double eta_const_factor = 0.05;  // auto eta_const = factor x median |residual|
  int fixed_l1 = -1;         // >= 0: switch at this iteration
  int window = 10;
  double stagnation_tol = 1e-3;

  void validate() const;
};

double step_at(const StepSchedule& sched, int l, int phase);

// Orthogonal projection of g onto the tangent space of the fixed-rank
// manifold at tucker_reconstruct(f):
//   core_dot = g x_1 U_1^T ... x_m U_m^T
//   arm_k    = (I - U_k U_k^T) M_k(g) kron_others(f,k) M_k(core)^+
// Throws degenerate_point_error when some M_k(core) has smallest singular
// value below 1e-12 x largest.
TangentVector tangent_project(const TuckerFactors& f, const DenseTensor& g);

DenseTensor dense_tangent(const TangentVector& tv);

// HOSVD retraction of a dense tensor.
TuckerFactors retract_dense(const DenseTensor& x, const std::vector<int>& ranks);

// Retraction of reconstruct(f) - eta*dense(tv) computed through a core of
// per-mode size <= 2 r_k: both the point and the tangent step live in the
// span of [U_k | arm_k].
TuckerFactors retract_efficient(const TuckerFactors& f, const TangentVector& tv, double eta);

}  // namespace rtucker
