#include "rtucker/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "rtucker/rng.hpp"

namespace rtucker {

void ObservationSet::validate() const {
  if (static_cast<std::int64_t>(entries.size()) !=
      fold_size * static_cast<std::int64_t>(fold_count))
    throw std::invalid_argument("ObservationSet: entries length must equal fold_size * fold_count");
  if (fold_count > 0 && fold_size <= 0)
    throw std::invalid_argument("ObservationSet: empty folds");
  for (const Observation& e : entries) {
    if (e.index.size() != dims.size())
      throw std::invalid_argument("ObservationSet: index order mismatch");
    for (std::size_t j = 0; j < dims.size(); ++j)
      if (e.index[j] < 0 || e.index[j] >= dims[j])
        throw std::invalid_argument("ObservationSet: index out of range");
  }
}

NoiseModel NoiseModel::gaussian(double sigma) {
  NoiseModel m;
  m.kind = Kind::Gaussian;
  m.sigma = sigma;
  m.validate();
  return m;
}

NoiseModel NoiseModel::student_t(double nu, double scale) {
  NoiseModel m;
  m.kind = Kind::StudentT;
  m.nu = nu;
  m.scale = scale;
  m.validate();
  return m;
}

NoiseModel NoiseModel::pareto_symmetric(double shape, double scale) {
  NoiseModel m;
  m.kind = Kind::ParetoSymmetric;
  m.shape = shape;
  m.scale = scale;
  m.validate();
  return m;
}

void NoiseModel::validate() const {
  switch (kind) {
    case Kind::None: return;
    case Kind::Gaussian:
      if (!(sigma > 0.0)) throw std::invalid_argument("Gaussian noise requires sigma > 0");
      return;
    case Kind::StudentT:
      if (!(nu > 0.0) || !(scale > 0.0))
        throw std::invalid_argument("StudentT noise requires nu > 0 and scale > 0");
      return;
    case Kind::ParetoSymmetric:
      if (!(shape > 0.0) || !(scale > 0.0))
        throw std::invalid_argument("ParetoSymmetric noise requires shape > 0 and scale > 0");
      return;
  }
  throw std::invalid_argument("invalid noise kind");
}

double NoiseModel::mean_abs() const {
  switch (kind) {
    case Kind::None:
      return 0.0;
    case Kind::Gaussian:
      return sigma * std::sqrt(2.0 / M_PI);
    case Kind::StudentT: {
      if (!(nu > 1.0)) throw std::invalid_argument("StudentT mean_abs requires nu > 1");
      // E|t_nu| = 2 sqrt(nu) Gamma((nu+1)/2) / (sqrt(pi) (nu-1) Gamma(nu/2))
      const double lg = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0);
      return scale * 2.0 * std::sqrt(nu) * std::exp(lg) / (std::sqrt(M_PI) * (nu - 1.0));
    }
    case Kind::ParetoSymmetric:
      if (!(shape > 1.0)) throw std::invalid_argument("ParetoSymmetric mean_abs requires shape > 1");
      return scale * shape / (shape - 1.0);
  }
  throw std::invalid_argument("invalid noise kind");
}

std::string NoiseModel::name() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::Gaussian: return "gaussian";
    case Kind::StudentT: return "studentt";
    case Kind::ParetoSymmetric: return "pareto";
  }
  return "?";
}

void CorruptionModel::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::invalid_argument("CorruptionModel: alpha must be in [0,1)");
  if (!(magnitude > 0.0)) throw std::invalid_argument("CorruptionModel: magnitude must be positive");
}

std::pair<TuckerFactors, SignalDiagnostics> gen_lowrank(const std::vector<int>& dims,
                                                        const std::vector<int>& ranks,
                                                        std::uint64_t seed, double target_fro) {
  if (dims.size() != ranks.size()) throw std::invalid_argument("gen_lowrank: length mismatch");
  Rng rng(seed);
  TuckerFactors f;
  f.factors.resize(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) {
    Matrix g(dims[k], ranks[k]);
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    f.factors[k] = qr.householderQ() * Matrix::Identity(dims[k], ranks[k]);
  }
  f.core = DenseTensor(ranks, 0.0);
  double sq = 0.0;
  for (double& v : f.core.values) {
    v = rng.normal();
    sq += v * v;
  }
  if (target_fro > 0.0) {
    const double s = target_fro / std::sqrt(sq);
    for (double& v : f.core.values) v *= s;
  }
  return {f, estimate_signal_diagnostics(f)};
}

namespace {

double draw_noise(Rng& rng, const NoiseModel& m) {
  switch (m.kind) {
    case NoiseModel::Kind::None: return 0.0;
    case NoiseModel::Kind::Gaussian: return m.sigma * rng.normal();
    case NoiseModel::Kind::StudentT: return m.scale * rng.student_t(m.nu);
    case NoiseModel::Kind::ParetoSymmetric: return rng.pareto_symmetric(m.shape, m.scale);
  }
  return 0.0;
}

}  // namespace

DenseTensor gen_noise(const std::vector<int>& dims, const NoiseModel& model, std::uint64_t seed) {
  model.validate();
  Rng rng(seed);
  DenseTensor t(dims, 0.0);
  for (double& v : t.values) v = draw_noise(rng, model);
  return t;
}

DenseTensor gen_corruption(const std::vector<int>& dims, const CorruptionModel& model,
                           double ref_sup) {
  model.validate();
  DenseTensor out(dims, 0.0);
  const std::int64_t total = out.size();
  const std::int64_t target = static_cast<std::int64_t>(model.alpha * static_cast<double>(total));
  if (target == 0) return out;

  Rng rng(model.seed);

  std::unordered_set<std::int64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(target) * 2);
  while (static_cast<std::int64_t>(chosen.size()) < target)
    chosen.insert(rng.uniform_index(total));
  std::vector<std::int64_t> support(chosen.begin(), chosen.end());
  std::sort(support.begin(), support.end());

  const int m = static_cast<int>(dims.size());
  std::vector<std::int64_t> suffix(m, 1);
  for (int k = m - 2; k >= 0; --k) suffix[k] = suffix[k + 1] * dims[k + 1];
  auto mode_index = [&](std::int64_t lin, int k) {
    return static_cast<int>((lin / suffix[k]) % dims[k]);
  };

  // Remove entries from over-cap slices until every mode satisfies the
  // per-slice bound. Removal only, so this terminates.
  std::vector<std::int64_t> caps(m);
  for (int k = 0; k < m; ++k) {
    const double dkm = static_cast<double>(total / dims[k]);
    caps[k] = static_cast<std::int64_t>(std::ceil(model.alpha * dkm));
  }
  bool dirty = true;
  while (dirty) {
    dirty = false;
    for (int k = 0; k < m; ++k) {
      std::vector<std::vector<std::size_t>> per_slice(dims[k]);
      for (std::size_t i = 0; i < support.size(); ++i)
        if (support[i] >= 0) per_slice[mode_index(support[i], k)].push_back(i);
      for (int j = 0; j < dims[k]; ++j) {
        std::int64_t excess = static_cast<std::int64_t>(per_slice[j].size()) - caps[k];
        while (excess > 0) {
          auto& bucket = per_slice[j];
          const std::int64_t pick = rng.uniform_index(static_cast<std::int64_t>(bucket.size()));
          support[bucket[pick]] = -1;
          bucket.erase(bucket.begin() + pick);
          --excess;
          dirty = true;
        }
      }
    }
  }

  const double value = model.magnitude * ref_sup;
  for (std::int64_t lin : support) {
    if (lin < 0) continue;
    double v = value;
    if (model.sign == CorruptionModel::Sign::Random && rng.bernoulli(0.5)) v = -v;
    out.values[lin] = v;
  }
  return out;
}

ObservationSet gen_observations(const TuckerFactors& truth, const NoiseModel& noise,
                                const CorruptionModel& corruption, std::int64_t n_per_fold,
                                int folds, std::uint64_t seed) {
  noise.validate();
  corruption.validate();
  if (n_per_fold <= 0 || folds <= 0)
    throw std::invalid_argument("gen_observations: fold structure must be positive");

  const DenseTensor dense = tucker_reconstruct(truth);
  const double ref_sup = norms(dense).sup;
  const std::vector<int> dims = dense.dims;
  const int m = static_cast<int>(dims.size());

  Rng rng(seed);
  ObservationSet obs;
  obs.dims = dims;
  obs.fold_size = n_per_fold;
  obs.fold_count = folds;
  obs.entries.resize(static_cast<std::size_t>(n_per_fold) * folds);
  for (Observation& e : obs.entries) {
    std::int64_t lin = rng.uniform_index(dense.size());
    e.index.resize(m);
    for (int k = m - 1; k >= 0; --k) {
      e.index[k] = static_cast<int>(lin % dims[k]);
      lin /= dims[k];
    }
    e.value = dense.values[dense.linear_index(e.index)] + draw_noise(rng, noise);
    if (corruption.alpha > 0.0 && rng.bernoulli(corruption.alpha)) {
      double s = corruption.magnitude * ref_sup;
      if (corruption.sign == CorruptionModel::Sign::Random && rng.bernoulli(0.5)) s = -s;
      e.value += s;
    }
  }
  return obs;
}

}  // namespace rtucker
