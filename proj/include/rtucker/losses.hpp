#pragma once

#include <string>

#include "rtucker/tensor.hpp"

namespace rtucker {

enum class LossKind { Square, PseudoHuber, Quantile };

// Entrywise loss. delta is the smoothing parameter for PseudoHuber (> 0) and
// the quantile level for Quantile (in (0,1)); Square ignores it. Quantile at
// delta == 1/2 is the absolute loss |x| with sub-gradient sign(x), sign(0) = 0.
struct LossSpec {
  LossKind kind = LossKind::Square;
  double delta = 0.0;

  static LossSpec square() { return {LossKind::Square, 0.0}; }
  static LossSpec pseudo_huber(double delta) { return {LossKind::PseudoHuber, delta}; }
  static LossSpec quantile(double delta = 0.5) { return {LossKind::Quantile, delta}; }
  static LossSpec absolute() { return quantile(0.5); }

  void validate() const;  // throws std::invalid_argument
  std::string name() const;
};

double rho(const LossSpec& spec, double x);
double drho(const LossSpec& spec, double x);

// sum_w rho([t]_w - [y]_w)
double loss_value(const DenseTensor& t, const DenseTensor& y, const LossSpec& spec);

// Entrywise drho([t]_w - [y]_w). Sup-norm <= 1 for PseudoHuber and Quantile.
DenseTensor vanilla_gradient(const DenseTensor& t, const DenseTensor& y, const LossSpec& spec);

}  // namespace rtucker
