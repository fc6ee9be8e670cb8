#include "rtucker/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rtucker {

std::int64_t dim_product(std::span<const int> dims) {
  std::int64_t p = 1;
  for (int d : dims) p *= d;
  return p;
}

DenseTensor::DenseTensor(std::vector<int> d, double fill) : dims(std::move(d)) {
  values.assign(static_cast<std::size_t>(dim_product(dims)), fill);
  validate();
}

DenseTensor::DenseTensor(std::vector<int> d, std::vector<double> v)
    : dims(std::move(d)), values(std::move(v)) {
  validate();
}

void DenseTensor::validate() const {
  if (dims.size() < 2) throw std::invalid_argument("DenseTensor: order must be >= 2");
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("DenseTensor: dims must be positive");
  if (static_cast<std::int64_t>(values.size()) != dim_product(dims))
    throw std::invalid_argument("DenseTensor: values length does not match dims");
}

std::int64_t DenseTensor::linear_index(std::span<const int> idx) const {
  std::int64_t lin = 0;
  for (std::size_t j = 0; j < dims.size(); ++j) lin = lin * dims[j] + idx[j];
  return lin;
}

Norms norms(const DenseTensor& t) {
  Norms n;
  double sq = 0.0;
  for (double v : t.values) {
    sq += v * v;
    n.l1 += std::abs(v);
    n.sup = std::max(n.sup, std::abs(v));
  }
  n.fro = std::sqrt(sq);
  return n;
}

double l2inf(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  return m.rowwise().norm().maxCoeff();
}

namespace {

void check_mode(const DenseTensor& t, int k) {
  if (k < 0 || k >= t.order()) throw std::invalid_argument("mode index out of range");
}

// Sizes of the index blocks before and after mode k in the linear layout.
struct ModeSplit {
  std::int64_t prefix;  // product of dims before k
  std::int64_t suffix;  // product of dims after k
};

ModeSplit split_at(const std::vector<int>& dims, int k) {
  ModeSplit s{1, 1};
  for (int j = 0; j < k; ++j) s.prefix *= dims[j];
  for (int j = k + 1; j < static_cast<int>(dims.size()); ++j) s.suffix *= dims[j];
  return s;
}

}  // namespace

DenseTensor slice_mask(const DenseTensor& t, int k, int j) {
  check_mode(t, k);
  if (j < 0 || j >= t.dims[k]) throw std::invalid_argument("slice index out of range");
  DenseTensor out(t.dims, 0.0);
  const auto [prefix, suffix] = split_at(t.dims, k);
  const int dk = t.dims[k];
  for (std::int64_t o = 0; o < prefix; ++o) {
    const std::int64_t base = (o * dk + j) * suffix;
    for (std::int64_t i = 0; i < suffix; ++i) out.values[base + i] = t.values[base + i];
  }
  return out;
}

Matrix matricize(const DenseTensor& t, int k) {
  check_mode(t, k);
  const auto [prefix, suffix] = split_at(t.dims, k);
  const int dk = t.dims[k];
  Matrix m(dk, prefix * suffix);
  for (std::int64_t o = 0; o < prefix; ++o)
    for (int r = 0; r < dk; ++r) {
      const double* src = t.values.data() + (o * dk + r) * suffix;
      for (std::int64_t i = 0; i < suffix; ++i) m(r, o * suffix + i) = src[i];
    }
  return m;
}

DenseTensor tensorize(const Matrix& m, int k, const std::vector<int>& dims) {
  if (k < 0 || k >= static_cast<int>(dims.size()))
    throw std::invalid_argument("mode index out of range");
  const auto [prefix, suffix] = split_at(dims, k);
  const int dk = dims[k];
  if (m.rows() != dk || m.cols() != prefix * suffix)
    throw std::invalid_argument("tensorize: matrix shape does not match dims");
  DenseTensor t(dims, 0.0);
  for (std::int64_t o = 0; o < prefix; ++o)
    for (int r = 0; r < dk; ++r) {
      double* dst = t.values.data() + (o * dk + r) * suffix;
      for (std::int64_t i = 0; i < suffix; ++i) dst[i] = m(r, o * suffix + i);
    }
  return t;
}

DenseTensor mode_product(const DenseTensor& t, const Matrix& a, int k) {
  check_mode(t, k);
  const int dk = t.dims[k];
  if (a.cols() != dk) throw std::invalid_argument("mode_product: matrix columns must equal mode size");
  const auto [prefix, suffix] = split_at(t.dims, k);
  const int p = static_cast<int>(a.rows());

  std::vector<int> odims = t.dims;
  odims[k] = p;
  DenseTensor out(odims, 0.0);

  using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using RowMajorMutMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  for (std::int64_t o = 0; o < prefix; ++o) {
    RowMajorMap block(t.values.data() + o * dk * suffix, dk, suffix);
    RowMajorMutMap res(out.values.data() + o * p * suffix, p, suffix);
    res.noalias() = a * block;
  }
  return out;
}

DenseTensor add_scaled(const DenseTensor& a, const DenseTensor& b, double scale) {
  if (a.dims != b.dims) throw std::invalid_argument("add_scaled: dimension mismatch");
  DenseTensor out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += scale * b.values[i];
  return out;
}

}  // namespace rtucker
