#include "rtucker/init.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rtucker {

DenseTensor truncate_entries(const DenseTensor& y, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("truncate_entries: tau must be positive");
  DenseTensor out = y;
  for (double& v : out.values) v = std::clamp(v, -tau, tau);
  return out;
}

TuckerFactors spectral_init(const DenseTensor& y, const InitConfig& cfg) {
  const double tau = cfg.tau < 0.0 ? estimate_tau_auto(y) : cfg.tau;
  if (!(tau > 0.0))
    throw std::invalid_argument("spectral_init: truncation level must be positive");
  return hosvd(truncate_entries(y, tau), cfg.ranks);
}

double estimate_noise_scale(const DenseTensor& t, const DenseTensor& y) {
  if (t.dims != y.dims) throw std::invalid_argument("estimate_noise_scale: dimension mismatch");
  std::vector<double> r(t.values.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::abs(t.values[i] - y.values[i]);
  const std::size_t n = r.size();
  const std::size_t mid = n / 2;
  std::nth_element(r.begin(), r.begin() + mid, r.end());
  double med = r[mid];
  if (n % 2 == 0) {
    // Mean of the two central order statistics.
    const double lower = *std::max_element(r.begin(), r.begin() + mid);
    med = 0.5 * (med + lower);
  }
  return med;
}

double estimate_tau_auto(const DenseTensor& y) {
  if (y.values.empty()) throw std::invalid_argument("estimate_tau_auto: empty tensor");
  std::vector<double> a(y.values.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(y.values[i]);
  std::sort(a.begin(), a.end());
  const double pos = 0.999 * static_cast<double>(a.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= a.size()) return a.back();
  return a[lo] + frac * (a[lo + 1] - a[lo]);
}

}  // namespace rtucker
