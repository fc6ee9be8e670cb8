#pragma once

#include <vector>

#include "rtucker/tucker.hpp"

namespace rtucker {

// Spectral initialization config. tau < 0 selects the automatic level
// estimate_tau_auto(y); an explicit tau must be positive.
struct InitConfig {
  double tau = -1.0;
  std::vector<int> ranks;
};

// Entrywise clamp to [-tau, tau].
DenseTensor truncate_entries(const DenseTensor& y, double tau);

// hosvd(truncate_entries(y, tau), ranks).
TuckerFactors spectral_init(const DenseTensor& y, const InitConfig& cfg);

// Median of entrywise absolute residuals |t - y| (even count: mean of the
// central pair).
double estimate_noise_scale(const DenseTensor& t, const DenseTensor& y);

// 99.9th percentile of |y| entries, linearly interpolated between order
// statistics. Scale-equivariant and deterministic.
double estimate_tau_auto(const DenseTensor& y);

}  // namespace rtucker
