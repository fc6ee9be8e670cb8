#include "rtucker/tucker.hpp"

#include <limits>
#include <stdexcept>

#include <Eigen/SVD>

namespace rtucker {

std::vector<int> TuckerFactors::dims() const {
  std::vector<int> d(factors.size());
  for (std::size_t k = 0; k < factors.size(); ++k) d[k] = static_cast<int>(factors[k].rows());
  return d;
}

void TuckerFactors::validate() const {
  core.validate();
  if (factors.size() != static_cast<std::size_t>(core.order()))
    throw std::invalid_argument("TuckerFactors: factor count must equal core order");
  for (int k = 0; k < core.order(); ++k) {
    const Matrix& u = factors[k];
    if (u.cols() != core.dims[k])
      throw std::invalid_argument("TuckerFactors: factor columns must equal core rank");
    if (u.rows() < u.cols())
      throw std::invalid_argument("TuckerFactors: rank exceeds dimension");
    Matrix gram = u.transpose() * u;
    gram.diagonal().array() -= 1.0;
    if (gram.cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument("TuckerFactors: factor columns are not orthonormal");
  }
}

Matrix kron_others(const TuckerFactors& f, int k) {
  const int m = f.order();
  if (k < 0 || k >= m) throw std::invalid_argument("mode index out of range");
  Matrix acc = Matrix::Ones(1, 1);
  for (int j = 0; j < m; ++j) {
    if (j == k) continue;
    const Matrix& u = f.factors[j];
    Matrix next(acc.rows() * u.rows(), acc.cols() * u.cols());
    for (Eigen::Index r = 0; r < acc.rows(); ++r)
      for (Eigen::Index c = 0; c < acc.cols(); ++c)
        next.block(r * u.rows(), c * u.cols(), u.rows(), u.cols()) = acc(r, c) * u;
    acc = std::move(next);
  }
  return acc;
}

DenseTensor tucker_reconstruct(const TuckerFactors& f) {
  DenseTensor t = f.core;
  for (int k = 0; k < f.order(); ++k) t = mode_product(t, f.factors[k], k);
  return t;
}

namespace {

// Orthonormal basis whose leading u.cols() columns span col(u); extra columns
// complete it up to `want` columns total.
Matrix orthonormal_extend(const Matrix& u, int want) {
  Eigen::HouseholderQR<Matrix> qr(u);
  return qr.householderQ() * Matrix::Identity(u.rows(), want);
}

}  // namespace

TuckerFactors hosvd(const DenseTensor& t, const std::vector<int>& ranks) {
  const int m = t.order();
  if (static_cast<int>(ranks.size()) != m)
    throw std::invalid_argument("hosvd: rank vector length must equal order");
  for (int k = 0; k < m; ++k)
    if (ranks[k] < 1 || ranks[k] > t.dims[k])
      throw std::invalid_argument("hosvd: rank out of range for mode " + std::to_string(k));

  TuckerFactors f;
  f.factors.resize(m);
  for (int k = 0; k < m; ++k) {
    Matrix mk = matricize(t, k);
    Eigen::BDCSVD<Matrix> svd(mk, Eigen::ComputeThinU);
    const int avail = static_cast<int>(svd.matrixU().cols());
    if (ranks[k] <= avail) {
      f.factors[k] = svd.matrixU().leftCols(ranks[k]);
    } else {
      f.factors[k] = orthonormal_extend(svd.matrixU(), ranks[k]);
    }
    // Guard against a degenerate SVD result (e.g. all-zero input on some
    // backends): fall back to the identity basis.
    Matrix gram = f.factors[k].transpose() * f.factors[k];
    gram.diagonal().array() -= 1.0;
    if (!gram.allFinite() || gram.cwiseAbs().maxCoeff() > 1e-10)
      f.factors[k] = Matrix::Identity(t.dims[k], ranks[k]);
  }

  f.core = t;
  for (int k = 0; k < m; ++k) f.core = mode_product(f.core, f.factors[k].transpose(), k);
  return f;
}

double incoherence(const TuckerFactors& f) {
  double mu = 0.0;
  for (int k = 0; k < f.order(); ++k) {
    const double row = l2inf(f.factors[k]);
    const double dk = static_cast<double>(f.factors[k].rows());
    const double rk = static_cast<double>(f.factors[k].cols());
    mu = std::max(mu, row * row * dk / rk);
  }
  return mu;
}

std::int64_t dof(const std::vector<int>& dims, const std::vector<int>& ranks) {
  if (dims.size() != ranks.size()) throw std::invalid_argument("dof: length mismatch");
  std::int64_t rp = 1, sum = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (ranks[k] < 1 || ranks[k] > dims[k]) throw std::invalid_argument("dof: rank out of range");
    rp *= ranks[k];
    sum += static_cast<std::int64_t>(dims[k]) * ranks[k];
  }
  return rp + sum;
}

namespace {

// Factors orthonormal => M_k(T) and M_k(core) share singular values.
SignalDiagnostics core_diagnostics(const DenseTensor& core_or_t, const std::vector<int>& ranks,
                                   double mu) {
  SignalDiagnostics d;
  d.mu = mu;
  d.lambda_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < core_or_t.order(); ++k) {
    Eigen::BDCSVD<Matrix> svd(matricize(core_or_t, k));
    const auto& sv = svd.singularValues();
    d.lambda_max = std::max(d.lambda_max, sv(0));
    d.lambda_min = std::min(d.lambda_min, sv(ranks[k] - 1));
  }
  if (!(d.lambda_max > 0.0))
    throw std::invalid_argument("estimate_signal_diagnostics: zero tensor, kappa undefined");
  d.kappa = d.lambda_max / d.lambda_min;
  return d;
}

}  // namespace

SignalDiagnostics estimate_signal_diagnostics(const TuckerFactors& f) {
  return core_diagnostics(f.core, f.ranks(), incoherence(f));
}

SignalDiagnostics estimate_signal_diagnostics(const DenseTensor& t, const std::vector<int>& ranks) {
  return core_diagnostics(t, ranks, incoherence(hosvd(t, ranks)));
}

}  // namespace rtucker
