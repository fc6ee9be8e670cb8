#include "rtucker/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace rtucker {

void LossSpec::validate() const {
  switch (kind) {
    case LossKind::Square:
      return;
    case LossKind::PseudoHuber:
      if (!(delta > 0.0)) throw std::invalid_argument("PseudoHuber requires delta > 0");
      return;
    case LossKind::Quantile:
      if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("Quantile requires delta in (0,1)");
      return;
  }
  throw std::invalid_argument("invalid loss kind");
}

std::string LossSpec::name() const {
  switch (kind) {
    case LossKind::Square: return "square";
    case LossKind::PseudoHuber: return "pseudohuber";
    case LossKind::Quantile: return "quantile";
  }
  return "?";
}

double rho(const LossSpec& spec, double x) {
  switch (spec.kind) {
    case LossKind::Square:
      return x * x;
    case LossKind::PseudoHuber:
      return std::sqrt(x * x + spec.delta * spec.delta);
    case LossKind::Quantile:
      if (spec.delta == 0.5) return std::abs(x);
      return x >= 0.0 ? spec.delta * x : (spec.delta - 1.0) * x;
  }
  throw std::invalid_argument("invalid loss kind");
}

double drho(const LossSpec& spec, double x) {
  switch (spec.kind) {
    case LossKind::Square:
      return 2.0 * x;
    case LossKind::PseudoHuber:
      return x / std::sqrt(x * x + spec.delta * spec.delta);
    case LossKind::Quantile:
      if (x == 0.0) return 0.0;  // chosen sub-gradient element at the kink
      if (spec.delta == 0.5) return x > 0.0 ? 1.0 : -1.0;
      return x > 0.0 ? spec.delta : spec.delta - 1.0;
  }
  throw std::invalid_argument("invalid loss kind");
}

double loss_value(const DenseTensor& t, const DenseTensor& y, const LossSpec& spec) {
  spec.validate();
  if (t.dims != y.dims) throw std::invalid_argument("loss_value: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < t.values.size(); ++i) sum += rho(spec, t.values[i] - y.values[i]);
  return sum;
}

DenseTensor vanilla_gradient(const DenseTensor& t, const DenseTensor& y, const LossSpec& spec) {
  spec.validate();
  if (t.dims != y.dims) throw std::invalid_argument("vanilla_gradient: dimension mismatch");
  DenseTensor g(t.dims, 0.0);
  for (std::size_t i = 0; i < t.values.size(); ++i)
    g.values[i] = drho(spec, t.values[i] - y.values[i]);
  return g;
}

}  // namespace rtucker
