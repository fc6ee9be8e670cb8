#include "rtucker/tangent.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace rtucker {

void StepSchedule::validate() const {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("StepSchedule: q must be in (0,1)");
  if (eta0 >= 0.0 && !(eta0 > 0.0)) throw std::invalid_argument("StepSchedule: eta0 must be positive");
  if (eta_const >= 0.0 && !(eta_const > 0.0))
    throw std::invalid_argument("StepSchedule: eta_const must be positive");
  if (!(eta_const_factor > 0.0))
    throw std::invalid_argument("StepSchedule: eta_const_factor must be positive");
}

double step_at(const StepSchedule& sched, int l, int phase) {
  if (l < 0) throw std::invalid_argument("step_at: negative iteration");
  if (phase == 1) return sched.eta0 * std::pow(sched.q, l);
  if (phase == 2) return sched.eta_const;
  throw std::invalid_argument("step_at: phase must be 1 or 2");
}

double TangentVector::norm() const {
  // Orthogonality of the components turns the squared norm into a sum.
  double sq = 0.0;
  for (double v : core_dot.values) sq += v * v;
  for (int k = 0; k < base.order(); ++k) {
    Matrix ck = matricize(base.core, k);
    sq += (arms[k] * ck).squaredNorm();
  }
  return std::sqrt(sq);
}

TangentVector tangent_project(const TuckerFactors& f, const DenseTensor& g) {
  const int m = f.order();
  if (g.dims != f.dims()) throw std::invalid_argument("tangent_project: dimension mismatch");

  TangentVector tv;
  tv.base = f;
  tv.arms.resize(m);

  tv.core_dot = g;
  for (int k = 0; k < m; ++k)
    tv.core_dot = mode_product(tv.core_dot, f.factors[k].transpose(), k);

  for (int k = 0; k < m; ++k) {
    // M_k(g) * kron_others(f, k), assembled as mode products with the other
    // factor transposes to avoid forming the Kronecker matrix.
    DenseTensor h = g;
    for (int j = 0; j < m; ++j)
      if (j != k) h = mode_product(h, f.factors[j].transpose(), j);
    Matrix w = matricize(h, k);  // d_k x r_k^-

    Matrix ck = matricize(f.core, k);  // r_k x r_k^-
    Eigen::JacobiSVD<Matrix> svd(ck, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    if (!(smax > 0.0) || sv(sv.size() - 1) < 1e-12 * smax)
      throw degenerate_point_error("tangent_project: core matricization is rank-deficient at mode " +
                                   std::to_string(k));
    Matrix pinv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();

    Matrix arm = w * pinv;
    arm -= f.factors[k] * (f.factors[k].transpose() * arm);
    tv.arms[k] = std::move(arm);
  }
  return tv;
}

DenseTensor dense_tangent(const TangentVector& tv) {
  const int m = tv.base.order();
  TuckerFactors part;
  part.core = tv.core_dot;
  part.factors = tv.base.factors;
  DenseTensor out = tucker_reconstruct(part);
  for (int k = 0; k < m; ++k) {
    DenseTensor term = tv.base.core;
    for (int j = 0; j < m; ++j)
      term = mode_product(term, j == k ? tv.arms[k] : tv.base.factors[j], j);
    out = add_scaled(out, term, 1.0);
  }
  return out;
}

TuckerFactors retract_dense(const DenseTensor& x, const std::vector<int>& ranks) {
  return hosvd(x, ranks);
}

TuckerFactors retract_efficient(const TuckerFactors& f, const TangentVector& tv, double eta) {
  const int m = f.order();
  const std::vector<int> ranks = f.ranks();
  const std::vector<int> dims = f.dims();

  // Per-mode extended bases spanning both U_k and arm_k.
  std::vector<Matrix> w(m), e(m), a(m);
  std::vector<int> sdims(m);
  for (int k = 0; k < m; ++k) {
    const int sk = std::min(2 * ranks[k], dims[k]);
    Matrix both(dims[k], 2 * ranks[k]);
    both << f.factors[k], tv.arms[k];
    Eigen::HouseholderQR<Matrix> qr(both);
    w[k] = qr.householderQ() * Matrix::Identity(dims[k], sk);
    e[k] = w[k].transpose() * f.factors[k];  // s_k x r_k
    a[k] = w[k].transpose() * tv.arms[k];    // s_k x r_k
    sdims[k] = sk;
  }

  // Small core of reconstruct(f) - eta*dense(tv) in the extended bases.
  DenseTensor small = add_scaled(f.core, tv.core_dot, -eta);
  for (int k = 0; k < m; ++k) small = mode_product(small, e[k], k);
  for (int k = 0; k < m; ++k) {
    DenseTensor term = f.core;
    for (int j = 0; j < m; ++j)
      term = mode_product(term, j == k ? a[k] : e[j], j);
    small = add_scaled(small, term, -eta);
  }

  TuckerFactors inner = hosvd(small, ranks);
  TuckerFactors out;
  out.core = std::move(inner.core);
  out.factors.resize(m);
  for (int k = 0; k < m; ++k) out.factors[k] = w[k] * inner.factors[k];
  return out;
}

}  // namespace rtucker
