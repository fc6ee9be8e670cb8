#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rtucker {

using Matrix = Eigen::MatrixXd;

// Dense order-m tensor, real64 values in row-major order (last index fastest).
// Invariants: order >= 2, every dim >= 1, values.size() == product of dims.
struct DenseTensor {
  std::vector<int> dims;
  std::vector<double> values;

  DenseTensor() = default;
  explicit DenseTensor(std::vector<int> d, double fill = 0.0);
  DenseTensor(std::vector<int> d, std::vector<double> v);

  int order() const { return static_cast<int>(dims.size()); }
  std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }

  double& operator[](std::int64_t i) { return values[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }

  std::int64_t linear_index(std::span<const int> idx) const;

  void validate() const;  // throws std::invalid_argument on any broken invariant
};

std::int64_t dim_product(std::span<const int> dims);

struct Norms {
  double fro = 0.0;
  double l1 = 0.0;
  double sup = 0.0;
};

Norms norms(const DenseTensor& t);

// Max row l2-norm of a matrix (the (2,inf)-norm).
double l2inf(const Matrix& m);

// Zeroes every entry whose mode-k index differs from j.
DenseTensor slice_mask(const DenseTensor& t, int k, int j);

// Mode-k matricization: rows index mode k, columns enumerate the remaining
// modes in their original order with the last one varying fastest.
Matrix matricize(const DenseTensor& t, int k);

// Inverse of matricize for the given dims.
DenseTensor tensorize(const Matrix& m, int k, const std::vector<int>& dims);

// T x_k A with A of shape p x d_k; the result has mode-k size p and satisfies
// matricize(result, k) == A * matricize(T, k).
DenseTensor mode_product(const DenseTensor& t, const Matrix& a, int k);

// Entrywise combinations used throughout the solvers.
DenseTensor add_scaled(const DenseTensor& a, const DenseTensor& b, double scale);  // a + scale*b

}  // namespace rtucker
