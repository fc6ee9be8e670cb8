#include "rtucker/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include "rtucker/rng.hpp"

namespace rtucker {

namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentSpec::validate() const {
  if (dims.size() < 2 || dims.size() != ranks.size())
    throw std::invalid_argument("ExperimentSpec: dims/ranks must match and have order >= 2");
  if (replications < 1) throw std::invalid_argument("ExperimentSpec: replications must be >= 1");
  if (!seeds.empty() && seeds.size() != static_cast<std::size_t>(replications))
    throw std::invalid_argument("ExperimentSpec: seeds length must equal replications");
  if (losses.empty()) throw std::invalid_argument("ExperimentSpec: at least one loss required");
  noise.validate();
  if (corruption) corruption->validate();
}

namespace {

NoiseModel noise_from_json(const json& j) {
  const std::string kind = j.value("kind", "none");
  if (kind == "none") return NoiseModel::none();
  if (kind == "gaussian") return NoiseModel::gaussian(j.value("sigma", 1.0));
  if (kind == "studentt") return NoiseModel::student_t(j.value("nu", 3.0), j.value("scale", 1.0));
  if (kind == "pareto")
    return NoiseModel::pareto_symmetric(j.value("shape", 3.0), j.value("scale", 1.0));
  throw std::invalid_argument("unknown noise kind: " + kind);
}

LossSpec loss_from_json(const json& j) {
  std::string kind;
  double delta = -1.0;
  if (j.is_string()) {
    kind = j.get<std::string>();
  } else {
    kind = j.value("kind", "quantile");
    delta = j.value("delta", -1.0);
  }
  if (kind == "square") return LossSpec::square();
  if (kind == "pseudohuber") return {LossKind::PseudoHuber, delta};  // delta < 0: auto
  if (kind == "quantile") return LossSpec::quantile(delta < 0.0 ? 0.5 : delta);
  throw std::invalid_argument("unknown loss kind: " + kind);
}

}  // namespace

ExperimentSpec ExperimentSpec::from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error("cannot open: " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw io_error("bad JSON in " + path + ": " + e.what());
  }

  ExperimentSpec spec;
  spec.name = j.value("name", "experiment");
  spec.dims = j.at("dims").get<std::vector<int>>();
  spec.ranks = j.at("ranks").get<std::vector<int>>();
  if (j.contains("noise")) spec.noise = noise_from_json(j.at("noise"));
  if (j.contains("corruption")) {
    const json& c = j.at("corruption");
    CorruptionModel cm;
    cm.alpha = c.value("alpha", 0.0);
    cm.magnitude = c.value("magnitude", 100.0);
    cm.sign = c.value("sign", std::string("positive")) == "random"
                  ? CorruptionModel::Sign::Random
                  : CorruptionModel::Sign::Positive;
    spec.corruption = cm;
  }
  spec.snr = j.value("snr", -1.0);
  for (const json& l : j.at("losses")) spec.losses.push_back(loss_from_json(l));
  spec.replications = j.value("replications", 1);
  spec.base_seed = j.value("base_seed", static_cast<std::uint64_t>(1));
  if (j.contains("seeds")) spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    spec.solver.max_iters = s.value("max_iters", -1);
    spec.solver.q = s.value("q", -1.0);
    spec.solver.eta0 = s.value("eta0", -1.0);
    spec.solver.eta_const = s.value("eta", -1.0);
    spec.solver.tol = s.value("tol", -1.0);
    spec.solver.fixed_l1 = s.value("fixed_l1", -1);
    spec.solver.enable_trim = s.value("trim", false);
    spec.solver.tau1 = s.value("tau1", -1.0);
    spec.solver.tau2 = s.value("tau2", -1.0);
    spec.solver.delta = s.value("delta", -1.0);
    spec.solver.tau_init = s.value("tau_init", -1.0);
    spec.solver.eta0_scale = s.value("eta0_scale", 1.0);
    spec.solver.eta_const_factor = s.value("eta_factor", -1.0);
    spec.solver.init_rule = s.value("init_rule", std::string("mad"));
  }
  spec.validate();
  return spec;
}

SyntheticInstance make_instance(const ExperimentSpec& spec, std::uint64_t seed) {
  double target_fro = -1.0;
  if (spec.snr > 0.0) target_fro = spec.snr * spec.noise.mean_abs();

  SyntheticInstance inst;
  auto [truth, diag] = gen_lowrank(spec.dims, spec.ranks, seed, target_fro);
  inst.truth = std::move(truth);
  inst.diagnostics = diag;
  inst.truth_dense = tucker_reconstruct(inst.truth);

  inst.y = inst.truth_dense;
  if (spec.noise.kind != NoiseModel::Kind::None) {
    DenseTensor noise = gen_noise(spec.dims, spec.noise, seed + 1000003);
    inst.y = add_scaled(inst.y, noise, 1.0);
  }
  if (spec.corruption && spec.corruption->alpha > 0.0) {
    CorruptionModel cm = *spec.corruption;
    cm.seed = seed + 2000003;
    DenseTensor s = gen_corruption(spec.dims, cm, norms(inst.truth_dense).sup);
    inst.y = add_scaled(inst.y, s, 1.0);
  }
  return inst;
}

double robust_init_tau(const DenseTensor& y) {
  std::vector<double> v = y.values;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double med = v[mid];
  for (double& x : v) x = std::abs(x - med);
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double mad = 1.4826 * v[mid];
  const double tau = 10.0 * mad;
  return tau > 0.0 ? tau : std::max(norms(y).sup, 1e-300);
}

TuckerFactors pipeline_init(const DenseTensor& y, const std::vector<int>& ranks, double tau,
                            const LossSpec& loss) {
  InitConfig ic;
  ic.ranks = ranks;
  ic.tau = tau;
  TuckerFactors truncated = spectral_init(y, ic);
  TuckerFactors plain = hosvd(y, ranks);
  const double lt = loss_value(tucker_reconstruct(truncated), y, loss);
  const double lp = loss_value(tucker_reconstruct(plain), y, loss);
  return lt <= lp ? truncated : plain;
}

SolveResult run_pipeline(const DenseTensor& y, const std::vector<int>& ranks, LossSpec loss,
                         const SolverOverrides& ov, const DenseTensor* truth) {
  double tau = ov.tau_init;
  if (tau <= 0.0) tau = ov.init_rule == "quantile" ? estimate_tau_auto(y) : robust_init_tau(y);

  // A PseudoHuber smoothing below zero resolves to the residual scale of a
  // cheap truncated start.
  if (loss.kind == LossKind::PseudoHuber && loss.delta <= 0.0) {
    InitConfig ic;
    ic.ranks = ranks;
    ic.tau = tau;
    TuckerFactors probe = spectral_init(y, ic);
    const double scale = estimate_noise_scale(tucker_reconstruct(probe), y);
    loss.delta = std::max(scale, 1e-12 * (1.0 + norms(y).sup));
  }

  TuckerFactors t0 = pipeline_init(y, ranks, tau, loss);

  SolverConfig cfg;
  cfg.loss = loss;
  cfg.ranks = ranks;
  if (ov.max_iters > 0) cfg.max_iters = ov.max_iters;
  if (ov.tol >= 0.0) cfg.tol = ov.tol;
  cfg.enable_trim = ov.enable_trim;
  cfg.tau1 = ov.tau1;
  cfg.tau2 = ov.tau2;
  if (ov.q > 0.0) cfg.schedule.q = ov.q;
  cfg.schedule.eta0 = ov.eta0;
  cfg.schedule.eta_const = ov.eta_const;
  cfg.schedule.fixed_l1 = ov.fixed_l1;
  if (ov.eta_const_factor > 0.0) cfg.schedule.eta_const_factor = ov.eta_const_factor;

  if (loss.kind == LossKind::Square) {
    // Classical RGrad: a constant unit-curvature step from the start.
    if (cfg.schedule.eta0 < 0.0) cfg.schedule.eta0 = 0.5;
    if (cfg.schedule.eta_const < 0.0) cfg.schedule.eta_const = 0.5;
    if (ov.fixed_l1 < 0) cfg.schedule.fixed_l1 = 0;
  } else if (cfg.schedule.eta0 < 0.0) {
    // Corruption can dominate ||Y||_F; the truncated tensor carries the
    // robust scale.
    const DenseTensor clipped = truncate_entries(y, tau);
    cfg.schedule.eta0 =
        ov.eta0_scale * 0.3 * norms(clipped).fro / std::sqrt(static_cast<double>(y.size()));
  }

  if (loss.kind == LossKind::Quantile) return rsgrad_quantile_trim(y, cfg, t0, truth);
  return rsgrad(y, cfg, t0, truth);
}

namespace {

struct Fold0Sample {
  std::vector<std::int64_t> lin;
  std::vector<int> idx;  // fold_size x m, row-major
  std::vector<double> value;
  int order = 0;
  std::size_t size() const { return lin.size(); }
  const int* index(std::size_t i) const { return idx.data() + i * order; }
};

// Sum of the smallest (1 - drop_frac) fraction of absolute residuals. The
// exact interpolant of the clean subsample scores ~0 here no matter what the
// corrupted entries look like.
double fold0_trimmed_loss(const Fold0Sample& fold, const DenseTensor& fit, double drop_frac) {
  std::vector<double> r(fold.size());
  for (std::size_t i = 0; i < fold.size(); ++i)
    r[i] = std::abs(fit.values[fold.lin[i]] - fold.value[i]);
  const std::size_t keep =
      fold.size() - static_cast<std::size_t>(drop_frac * static_cast<double>(fold.size()));
  std::nth_element(r.begin(), r.begin() + keep, r.end());
  double s = 0.0;
  for (std::size_t i = 0; i < keep; ++i) s += r[i];
  return s;
}

// Decaying-step l1 descent on the fixed fold-0 subsample.
TuckerFactors refine_on_fold0(const Fold0Sample& fold, const std::vector<int>& dims,
                              TuckerFactors f, double eta_mult, double q, int iters) {
  DenseTensor cur = tucker_reconstruct(f);
  double eta = -1.0;
  for (int l = 0; l < iters; ++l) {
    DenseTensor g(dims, 0.0);
    bool nonzero = false;
    for (std::size_t i = 0; i < fold.size(); ++i) {
      const double d = drho(LossSpec::absolute(), cur.values[fold.lin[i]] - fold.value[i]);
      g.values[fold.lin[i]] += d;
      nonzero = nonzero || d != 0.0;
    }
    if (!nonzero) break;
    TangentVector tv;
    try {
      tv = tangent_project(f, g);
    } catch (const degenerate_point_error&) {
      break;
    }
    if (eta < 0.0) eta = eta_mult * norms(cur).fro / std::max(tv.norm(), 1e-12);
    f = retract_efficient(f, tv, eta * std::pow(q, l));
    cur = tucker_reconstruct(f);
  }
  return f;
}

// One alternating least-squares sweep over the core and every factor,
// fitting the fold values. Factors are free matrices during sweeps.
void als_sweep(const Fold0Sample& fold, const std::vector<int>& dims, std::vector<Matrix>& u,
               DenseTensor& core) {
  const int m = static_cast<int>(dims.size());
  const std::vector<int>& r = core.dims;
  const std::int64_t rstar = dim_product(r);
  {
    Matrix a(fold.size(), rstar);
    Eigen::VectorXd v(fold.size());
    for (std::size_t i = 0; i < fold.size(); ++i) {
      Eigen::VectorXd row = Eigen::VectorXd::Ones(1);
      for (int k = 0; k < m; ++k) {
        Eigen::VectorXd uk = u[k].row(fold.index(i)[k]).transpose();
        Eigen::VectorXd next(row.size() * uk.size());
        for (Eigen::Index p = 0; p < row.size(); ++p)
          next.segment(p * uk.size(), uk.size()) = row(p) * uk;
        row = std::move(next);
      }
      a.row(static_cast<Eigen::Index>(i)) = row.transpose();
      v(static_cast<Eigen::Index>(i)) = fold.value[i];
    }
    Eigen::VectorXd c = (a.transpose() * a + 1e-12 * Matrix::Identity(rstar, rstar))
                            .ldlt()
                            .solve(a.transpose() * v);
    for (std::int64_t q = 0; q < rstar; ++q) core.values[static_cast<std::size_t>(q)] = c(q);
  }
  for (int k = 0; k < m; ++k) {
    const int rk = r[k];
    std::vector<Matrix> ata(dims[k], Matrix::Zero(rk, rk));
    std::vector<Eigen::VectorXd> atv(dims[k], Eigen::VectorXd::Zero(rk));
    for (std::size_t i = 0; i < fold.size(); ++i) {
      DenseTensor c = core;
      for (int j = m - 1; j >= 0; --j)
        if (j != k) c = mode_product(c, u[j].row(fold.index(i)[j]), j);
      Eigen::VectorXd coef(rk);
      for (int q = 0; q < rk; ++q) coef(q) = c.values[static_cast<std::size_t>(q)];
      ata[fold.index(i)[k]] += coef * coef.transpose();
      atv[fold.index(i)[k]] += coef * fold.value[i];
    }
    for (int i = 0; i < dims[k]; ++i)
      u[k].row(i) = (ata[i] + 1e-12 * Matrix::Identity(rk, rk)).ldlt().solve(atv[i]).transpose();
  }
}

TuckerFactors orthonormalize(std::vector<Matrix> u, DenseTensor core) {
  TuckerFactors f;
  f.factors.resize(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    Eigen::HouseholderQR<Matrix> qr(u[k]);
    f.factors[k] =
        qr.householderQ() * Matrix::Identity(u[k].rows(), u[k].cols());
    core = mode_product(core, f.factors[k].transpose() * u[k], static_cast<int>(k));
  }
  f.core = std::move(core);
  return f;
}

// Rank-continuation fit: an easy rank-one ALS solve, factors extended by a
// small random orthogonal column per mode, then ALS at the full rank. Helps
// exactly where the straight descent struggles (weak trailing directions).
TuckerFactors rank_continuation_fit(const Fold0Sample& fold, const std::vector<int>& dims,
                                    const std::vector<int>& ranks, Rng& rng) {
  const int m = static_cast<int>(dims.size());
  std::vector<Matrix> u1(m);
  for (int k = 0; k < m; ++k) {
    u1[k] = Matrix(dims[k], 1);
    for (int i = 0; i < dims[k]; ++i) u1[k](i, 0) = rng.normal();
  }
  DenseTensor core1(std::vector<int>(m, 1), std::vector<double>{1.0});
  for (int sweep = 0; sweep < 25; ++sweep) als_sweep(fold, dims, u1, core1);

  std::vector<Matrix> u(m);
  for (int k = 0; k < m; ++k) {
    u[k] = Matrix::Zero(dims[k], ranks[k]);
    u[k].col(0) = u1[k].col(0);
    const double base = std::max(u1[k].col(0).norm(), 1e-12);
    for (int c = 1; c < ranks[k]; ++c) {
      Eigen::VectorXd extra(dims[k]);
      for (int i = 0; i < dims[k]; ++i) extra(i) = rng.normal();
      for (int p = 0; p < c; ++p)
        extra -= u[k].col(p) * (u[k].col(p).dot(extra) / u[k].col(p).squaredNorm());
      u[k].col(c) = extra * (0.1 * base / std::max(extra.norm(), 1e-12));
    }
  }
  DenseTensor core(ranks, 0.0);
  core.values[0] = core1.values[0];
  for (int sweep = 0; sweep < 120; ++sweep) als_sweep(fold, dims, u, core);
  return orthonormalize(std::move(u), std::move(core));
}

}  // namespace

TuckerFactors completion_init(const ObservationSet& obs, const std::vector<int>& ranks,
                              const CompletionInitOptions& opts) {
  obs.validate();
  if (obs.fold_count < 1 || obs.fold_size < 1)
    throw std::invalid_argument("completion_init: need a non-empty fold 0");
  const double dstar = static_cast<double>(dim_product(obs.dims));
  const int m = static_cast<int>(obs.dims.size());

  // Gross outliers among the fold-0 values would dominate both the fill and
  // the refinement objectives. Two clipped views of the fold: a strong clip
  // for the spectral part and robust ranking, and a weak clip (outlier-safe
  // but leaving clean values intact) for exact fitting.
  Fold0Sample fold, fold_weak;
  fold.order = fold_weak.order = m;
  {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(obs.fold_size));
    for (const Observation* e = obs.fold_begin(0); e != obs.fold_end(0); ++e)
      w.push_back(e->value);
    const std::size_t mid = w.size() / 2;
    std::nth_element(w.begin(), w.begin() + mid, w.end());
    const double med = w[mid];
    for (double& x : w) x = std::abs(x - med);
    std::nth_element(w.begin(), w.begin() + mid, w.end());
    const double mad_scale = 1.4826 * w[mid];
    const double strong_tau = 10.0 * mad_scale;
    const double weak_tau = 30.0 * mad_scale;
    for (const Observation* e = obs.fold_begin(0); e != obs.fold_end(0); ++e) {
      std::int64_t lin = 0;
      for (int k = 0; k < m; ++k) {
        lin = lin * obs.dims[k] + e->index[k];
        fold.idx.push_back(e->index[k]);
        fold_weak.idx.push_back(e->index[k]);
      }
      fold.lin.push_back(lin);
      fold_weak.lin.push_back(lin);
      fold.value.push_back(strong_tau > 0.0 ? std::clamp(e->value, -strong_tau, strong_tau)
                                            : e->value);
      fold_weak.value.push_back(weak_tau > 0.0 ? std::clamp(e->value, -weak_tau, weak_tau)
                                               : e->value);
    }
  }

  DenseTensor fill(obs.dims, 0.0);
  double data_scale = 0.0;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    fill.values[fold.lin[i]] += fold.value[i] * dstar / static_cast<double>(obs.fold_size);
    data_scale += std::abs(fold.value[i]);
  }
  double tau = opts.tau < 0.0 ? estimate_tau_auto(fill) : opts.tau;
  const DenseTensor clipped = tau > 0.0 ? truncate_entries(fill, tau) : fill;

  TuckerFactors spectral;
  spectral.factors.resize(m);
  for (int k = 0; k < m; ++k) {
    Matrix gram = matricize(clipped, k);
    gram = gram * gram.transpose();
    // The Gram diagonal carries the sampling variance; delete it.
    gram.diagonal().setZero();
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    spectral.factors[k] = es.eigenvectors().rightCols(ranks[k]);
  }
  spectral.core = clipped;
  for (int k = 0; k < m; ++k)
    spectral.core = mode_product(spectral.core, spectral.factors[k].transpose(), k);

  if (!opts.refine) return spectral;

  // Fraction of fold-0 values beyond the strong clip: near zero on clean
  // data, about the contamination rate otherwise. Clean folds fit the
  // (essentially raw) weak view throughout; contaminated folds rank against
  // the robust view.
  double outlier_frac = 0.0;
  for (std::size_t i = 0; i < fold.size(); ++i)
    outlier_frac += fold.value[i] != fold_weak.value[i];
  outlier_frac /= static_cast<double>(fold.size());
  const bool clean_fold = outlier_frac < 0.01;
  const double drop_frac = clean_fold ? 0.02 : std::min(0.45, 2.0 * outlier_frac + 0.02);
  auto score = [&](const DenseTensor& fit) {
    return fold0_trimmed_loss(fold_weak, fit, drop_frac);
  };

  TuckerFactors best = spectral;
  double best_loss = score(tucker_reconstruct(best));
  const double good_enough = 1e-9 * (data_scale + 1e-300);
  Rng rng(opts.seed);
  const double mults[] = {0.5, 1.0, 0.25, 2.0, 1.0};
  const double qs[] = {0.95, 0.97, 0.98, 0.96, 0.99};
  for (int attempt = 0; attempt <= opts.restarts && best_loss > good_enough; ++attempt) {
    const bool weak_view = clean_fold || attempt % 3 == 2;
    const Fold0Sample& view = weak_view ? fold_weak : fold;

    TuckerFactors cand;
    if (attempt % 2 == 1) {
      cand = rank_continuation_fit(view, obs.dims, ranks, rng);
    } else {
      TuckerFactors start = spectral;
      if (attempt > 0) {
        // alternate perturbations of the spectral factors with fresh draws
        const double blend = (attempt / 2) % 2 == 1 ? 0.5 * (1 + (attempt / 4) % 3) : -1.0;
        for (int k = 0; k < m; ++k) {
          Matrix g(obs.dims[k], ranks[k]);
          for (Eigen::Index i = 0; i < g.rows(); ++i)
            for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
          if (blend > 0.0) g = spectral.factors[k] + blend * g;
          Eigen::HouseholderQR<Matrix> qr(g);
          start.factors[k] = qr.householderQ() * Matrix::Identity(obs.dims[k], ranks[k]);
        }
        start.core = clipped;
        for (int k = 0; k < m; ++k)
          start.core = mode_product(start.core, start.factors[k].transpose(), k);
      }
      const int rung = attempt % 5;
      cand = refine_on_fold0(view, obs.dims, start, mults[rung], qs[rung], opts.refine_iters);
    }

    const DenseTensor fit = tucker_reconstruct(cand);
    const double cand_loss = score(fit);
    if (cand_loss < best_loss) {
      best_loss = cand_loss;
      best = cand;
    }
    // A trimmed score at rounding level certifies interpolation of the
    // clean subsample.
    if (best_loss <= good_enough) return best;
  }

  // Polish against the weakly clipped values; keep it only if the ranking
  // score does not degrade.
  TuckerFactors polished = refine_on_fold0(fold_weak, obs.dims, best, 0.3, 0.97, 200);
  if (score(tucker_reconstruct(polished)) <= best_loss * (1.0 + 1e-9)) best = polished;
  return best;
}

TuckerFactors completion_init(const ObservationSet& obs, const std::vector<int>& ranks,
                              double tau) {
  CompletionInitOptions opts;
  opts.tau = tau;
  return completion_init(obs, ranks, opts);
}

namespace {

int worker_count(std::size_t jobs) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("ROBUST_TUCKER_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return std::min<std::size_t>(n, jobs);
}

std::string row_key(const std::string& experiment, std::uint64_t seed, const std::string& loss) {
  std::ostringstream os;
  os << experiment << '\x1f' << std::setw(20) << std::setfill('0') << seed << '\x1f' << loss;
  return os.str();
}

std::string row_to_csv(const ResultRow& r) {
  std::ostringstream os;
  os << r.experiment << "," << r.seed << "," << r.loss << "," << format_double(r.alpha) << ","
     << format_double(r.snr) << "," << format_double(r.final_err_fro) << ","
     << format_double(r.final_err_sup) << "," << r.iters << ","
     << format_double(r.wall_time);
  return os.str();
}

constexpr const char* kResultsHeader =
    "experiment,seed,loss,alpha,snr,final_err_fro,final_err_sup,iters,wall_time";

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const std::string& out_dir,
                                      bool resume) {
  spec.validate();
  fs::create_directories(out_dir);
  fs::create_directories(fs::path(out_dir) / "traces");
  const std::string results_path = (fs::path(out_dir) / "results.csv").string();

  // Completed keys from a previous run keep their original lines.
  std::map<std::string, std::string> lines;
  if (resume && fs::exists(results_path)) {
    std::ifstream is(results_path);
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string experiment, seed, loss;
      std::getline(ss, experiment, ',');
      std::getline(ss, seed, ',');
      std::getline(ss, loss, ',');
      lines[row_key(experiment, std::stoull(seed), loss)] = line;
    }
  }

  struct Job {
    std::uint64_t seed;
    LossSpec loss;
  };
  std::vector<Job> jobs;
  for (int rep = 0; rep < spec.replications; ++rep) {
    const std::uint64_t seed = spec.seeds.empty() ? spec.base_seed + rep : spec.seeds[rep];
    for (const LossSpec& loss : spec.losses) {
      if (lines.count(row_key(spec.name, seed, loss.name()))) continue;
      jobs.push_back({seed, loss});
    }
  }

  std::vector<ResultRow> fresh(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      try {
        const auto start = std::chrono::steady_clock::now();
        SyntheticInstance inst = make_instance(spec, job.seed);
        SolverOverrides ov = spec.solver;
        SolveResult out =
            run_pipeline(inst.y, spec.ranks, job.loss, ov, &inst.truth_dense);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        const Norms tn = norms(inst.truth_dense);
        ResultRow row;
        row.experiment = spec.name;
        row.seed = job.seed;
        row.loss = job.loss.name();
        row.alpha = spec.corruption ? spec.corruption->alpha : 0.0;
        row.snr = spec.snr;
        row.final_err_fro = out.trace.final_record().err_fro / tn.fro;
        row.final_err_sup = out.trace.final_record().err_sup / tn.sup;
        row.iters = out.trace.final_record().iter;
        row.wall_time = secs;
        fresh[i] = row;

        std::ostringstream trace_name;
        trace_name << spec.name << "_" << job.loss.name() << "_" << job.seed << ".csv";
        write_trace_csv((fs::path(out_dir) / "traces" / trace_name.str()).string(), out.trace);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };

  const int workers = worker_count(jobs.size());
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();

  std::string failure;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!errors[i].empty()) {
      // Partial results are still flushed below.
      if (failure.empty()) failure = errors[i];
      continue;
    }
    lines[row_key(fresh[i].experiment, fresh[i].seed, fresh[i].loss)] = row_to_csv(fresh[i]);
  }

  std::ofstream os(results_path);
  os << kResultsHeader << "\n";
  for (const auto& [key, line] : lines) os << line << "\n";
  os.close();

  if (!failure.empty()) throw std::runtime_error("experiment run failed: " + failure);

  std::vector<ResultRow> rows;
  rows.reserve(fresh.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) rows.push_back(fresh[i]);
  return rows;
}

}  // namespace rtucker
