#pragma once

#include <vector>

#include "rtucker/tensor.hpp"

namespace rtucker {

// Tucker representation: core of dims (r_1..r_m) plus one d_k x r_k factor per
// mode, each with orthonormal columns (to 1e-10 per entry).
struct TuckerFactors {
  DenseTensor core;
  std::vector<Matrix> factors;

  int order() const { return core.order(); }
  std::vector<int> ranks() const { return core.dims; }
  std::vector<int> dims() const;

  void validate() const;  // throws std::invalid_argument
};

// Kronecker product of all factors except mode k, in ascending mode order with
// the last factor's index fastest. Shape d_k^- x r_k^-. Satisfies
//   matricize(tucker_reconstruct(F), k) == factors[k] * matricize(core, k) * kron_others(F, k)^T.
Matrix kron_others(const TuckerFactors& f, int k);

DenseTensor tucker_reconstruct(const TuckerFactors& f);

// Per-mode truncated SVD: factors[k] = top-r_k left singular vectors of
// matricize(t, k) (any orthonormal basis of the invariant subspace on ties;
// orthonormal completion when r_k exceeds the matricization rank), then
// core = t x_1 U_1' ... x_m U_m'.
TuckerFactors hosvd(const DenseTensor& t, const std::vector<int>& ranks);

// max_k ||U_k||_{2,inf}^2 * d_k / r_k. Equals 1 for perfectly flat factors,
// d_k for a single spike.
double incoherence(const TuckerFactors& f);

// r_1...r_m + sum_k d_k r_k.
std::int64_t dof(const std::vector<int>& dims, const std::vector<int>& ranks);

struct SignalDiagnostics {
  double lambda_min = 0.0;  // min_k sigma_{r_k}(M_k(T))
  double lambda_max = 0.0;  // max_k sigma_1(M_k(T))
  double kappa = 0.0;       // lambda_max / lambda_min
  double mu = 0.0;          // incoherence
};

// Throws std::invalid_argument on a zero tensor (kappa undefined). The dense
// overload runs hosvd(t, ranks) internally for the incoherence value.
SignalDiagnostics estimate_signal_diagnostics(const TuckerFactors& f);
SignalDiagnostics estimate_signal_diagnostics(const DenseTensor& t, const std::vector<int>& ranks);

}  // namespace rtucker
