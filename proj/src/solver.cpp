#include "rtucker/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rtucker/init.hpp"

namespace rtucker {

void SolverConfig::validate() const {
  loss.validate();
  schedule.validate();
  if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
  if (tol < 0.0) throw std::invalid_argument("SolverConfig: tol must be non-negative");
  if (schedule.window < 1) throw std::invalid_argument("SolverConfig: window must be >= 1");
  if (ranks.empty()) throw std::invalid_argument("SolverConfig: ranks must be set");
}

DenseTensor trun(const DenseTensor& t, const DenseTensor& b, double tau1) {
  if (t.dims != b.dims) throw std::invalid_argument("trun: dimension mismatch");
  if (tau1 < 0.0) throw std::invalid_argument("trun: tau1 must be non-negative");
  DenseTensor out = t;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = std::clamp(t.values[i], b.values[i] - tau1, b.values[i] + tau1);
  return out;
}

DenseTensor trim(const DenseTensor& t, double tau2) {
  if (tau2 < 0.0) throw std::invalid_argument("trim: tau2 must be non-negative");
  // Magnitude cap scaled by the Frobenius norm of the input tensor.
  const double bound = std::sqrt(tau2 / static_cast<double>(t.size())) * norms(t).fro;
  DenseTensor out = t;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = std::clamp(t.values[i], -bound, bound);
  return out;
}

namespace {

bool all_zero(const DenseTensor& g) {
  for (double v : g.values)
    if (v != 0.0) return false;
  return true;
}

TangentVector zero_tangent(const TuckerFactors& f) {
  TangentVector tv;
  tv.base = f;
  tv.core_dot = DenseTensor(f.ranks(), 0.0);
  tv.arms.resize(f.order());
  const std::vector<int> dims = f.dims();
  for (int k = 0; k < f.order(); ++k) tv.arms[k] = Matrix::Zero(dims[k], f.ranks()[k]);
  return tv;
}

struct TruthInfo {
  const DenseTensor* tensor = nullptr;
  void fill(IterateTrace& tr, const std::vector<int>& ranks) const {
    if (!tensor) return;
    tr.has_truth = true;
    const SignalDiagnostics d = estimate_signal_diagnostics(*tensor, ranks);
    tr.truth_lambda_min = d.lambda_min;
    tr.truth_lambda_max = d.lambda_max;
    tr.truth_kappa = d.kappa;
  }
  void fill(IterateRecord& rec, const DenseTensor& current) const {
    if (!tensor) return;
    double sq = 0.0, sup = 0.0;
    for (std::size_t i = 0; i < current.values.size(); ++i) {
      const double d = current.values[i] - tensor->values[i];
      sq += d * d;
      sup = std::max(sup, std::abs(d));
    }
    rec.err_fro = std::sqrt(sq);
    rec.err_sup = sup;
  }
};

// Shared state machine for the full-tensor solvers. The loss, gradient and
// the optional trimmed retraction are the only things that differ between
// the plain and quantile-trim variants.
SolveResult run_descent(const DenseTensor& y, const SolverConfig& cfg, const TuckerFactors& t0,
                        const DenseTensor* truth, bool trim_mode) {
  cfg.validate();
  t0.validate();
  if (t0.ranks() != cfg.ranks)
    throw std::invalid_argument("solver: initialization ranks differ from config ranks");
  if (t0.dims() != y.dims) throw std::invalid_argument("solver: dimension mismatch");
  if (trim_mode && cfg.loss.kind != LossKind::Quantile)
    throw std::invalid_argument("rsgrad_quantile_trim requires a quantile loss");
  if (truth && truth->dims != y.dims)
    throw std::invalid_argument("solver: ground-truth dimension mismatch");

  const std::int64_t dstar = y.size();
  StepSchedule sched = cfg.schedule;
  if (sched.eta0 < 0.0) sched.eta0 = 0.3 * norms(y).fro / std::sqrt(static_cast<double>(dstar));

  SolveResult res;
  res.factors = t0;
  IterateTrace& tr = res.trace;
  tr.resolved_eta0 = sched.eta0;
  TruthInfo ti{truth};
  ti.fill(tr, cfg.ranks);

  DenseTensor current = tucker_reconstruct(res.factors);
  int phase = 1;
  double tau1 = cfg.tau1, tau2 = cfg.tau2;
  DenseTensor switch_point;  // Trun reference, captured at the phase switch
  double prev_loss = 0.0;
  // Divergence is judged against the data scale: the loss at the zero tensor,
  // or the starting loss if that is even larger.
  double zero_loss = 0.0;
  for (double v : y.values) zero_loss += rho(cfg.loss, -v);
  double divergence_ref = zero_loss;
  // An absolute-loss residual at roundoff level still has unit sub-gradient
  // entries; a fit this exact is a solution, not a descent direction.
  const double exact_fit_floor = 1e-13 * (norms(y).l1 + 1.0);
  const std::int64_t rstar = dim_product(cfg.ranks);

  for (int l = 0; l <= cfg.max_iters; ++l) {
    const double loss = loss_value(current, y, cfg.loss);
    IterateRecord rec;
    rec.iter = l;
    rec.loss = loss;
    rec.mu = incoherence(res.factors);
    ti.fill(rec, current);

    if (!std::isfinite(loss)) {
      rec.phase = phase;
      tr.records.push_back(rec);
      tr.status = SolveStatus::Diverged;
      return res;
    }
    if (l == 0) {
      divergence_ref = std::max(loss, zero_loss);
    } else if (loss > 10.0 * divergence_ref) {
      rec.phase = phase;
      tr.records.push_back(rec);
      tr.status = SolveStatus::Diverged;
      return res;
    }

    const DenseTensor g = vanilla_gradient(current, y, cfg.loss);
    const TangentVector tv = all_zero(g) ? zero_tangent(res.factors)
                                         : tangent_project(res.factors, g);
    rec.pgrad_fro = tv.norm();

    const bool exact_fit = loss <= exact_fit_floor;
    if (exact_fit ||
        (l > 0 && std::abs(loss - prev_loss) <= cfg.tol * std::max(std::abs(prev_loss), 1e-300))) {
      rec.phase = phase;
      rec.eta = step_at(sched, l, phase);
      tr.records.push_back(rec);
      tr.status = SolveStatus::Converged;
      return res;
    }

    if (phase == 1) {
      bool want_switch = false;
      if (sched.fixed_l1 >= 0) {
        want_switch = l >= sched.fixed_l1;
      } else if (l >= sched.window) {
        // Progress stagnated: the decrease over the window is a negligible
        // fraction of the decrease achieved so far. Measuring against the
        // total progress keeps the rule insensitive to the loss background.
        const double loss0 = tr.records[0].loss;
        const double base = tr.records[l - sched.window].loss;
        const double progress = loss0 - loss;
        want_switch = progress > 0.0 &&
                      (base - loss) <= sched.stagnation_tol * std::max(progress, 1e-300);
      }
      if (want_switch) {
        double eta2 = sched.eta_const;
        if (eta2 < 0.0) eta2 = sched.eta_const_factor * estimate_noise_scale(current, y);
        if (eta2 > 0.0) {
          phase = 2;
          tr.phase_switch_iter = l;
          sched.eta_const = eta2;
          tr.resolved_eta_const = eta2;
          switch_point = current;
          if (trim_mode && cfg.enable_trim) {
            const double mu_hat = incoherence(res.factors);
            const double mu_pow = std::pow(mu_hat, res.factors.order());
            if (tau1 < 0.0) tau1 = 12.0 * estimate_noise_scale(current, y) * mu_pow * rstar;
            if (tau2 < 0.0) tau2 = 1.5 * mu_pow * rstar;
            tr.resolved_tau1 = tau1;
            tr.resolved_tau2 = tau2;
          }
        }
        // A zero residual scale means the point already fits the data;
        // decaying steps remain the right schedule.
      }
    }

    rec.phase = phase;
    rec.eta = step_at(sched, l, phase);
    tr.records.push_back(rec);
    if (l == cfg.max_iters) break;

    if (phase == 2 && trim_mode && cfg.enable_trim) {
      DenseTensor x = add_scaled(current, dense_tangent(tv), -rec.eta);
      x = trim(trun(x, switch_point, tau1), tau2);
      res.factors = retract_dense(x, cfg.ranks);
    } else {
      res.factors = retract_efficient(res.factors, tv, rec.eta);
    }
    current = tucker_reconstruct(res.factors);
    prev_loss = loss;
  }
  tr.status = SolveStatus::MaxIters;
  return res;
}

}  // namespace

SolveResult rsgrad(const DenseTensor& y, const SolverConfig& cfg, const TuckerFactors& t0,
                   const DenseTensor* truth) {
  return run_descent(y, cfg, t0, truth, /*trim_mode=*/false);
}

SolveResult rsgrad_quantile_trim(const DenseTensor& y, const SolverConfig& cfg,
                                 const TuckerFactors& t0, const DenseTensor* truth) {
  return run_descent(y, cfg, t0, truth, /*trim_mode=*/true);
}

SolveResult complete_sample_split(const ObservationSet& obs, const SolverConfig& cfg,
                                  const TuckerFactors& t0, const DenseTensor* truth) {
  cfg.validate();
  obs.validate();
  t0.validate();
  if (obs.fold_count < 2)
    throw std::invalid_argument("complete_sample_split: need at least two folds");
  if (t0.ranks() != cfg.ranks)
    throw std::invalid_argument("complete_sample_split: initialization ranks differ from config");
  if (t0.dims() != obs.dims) throw std::invalid_argument("complete_sample_split: dimension mismatch");

  const int iters = obs.fold_count - 1;  // one fold per iteration, fold 0 is for init

  SolveResult res;
  res.factors = t0;
  IterateTrace& tr = res.trace;
  TruthInfo ti{truth};
  ti.fill(tr, cfg.ranks);

  DenseTensor current = tucker_reconstruct(res.factors);
  StepSchedule sched = cfg.schedule;
  if (sched.eta0 > 0.0) tr.resolved_eta0 = sched.eta0;

  int phase = 1;
  for (int l = 0; l < iters; ++l) {
    const Observation* begin = obs.fold_begin(l + 1);
    const Observation* end = obs.fold_end(l + 1);

    double loss = 0.0, fold_zero_loss = 0.0;
    DenseTensor g(obs.dims, 0.0);
    std::vector<double> abs_residuals;
    abs_residuals.reserve(static_cast<std::size_t>(obs.fold_size));
    for (const Observation* e = begin; e != end; ++e) {
      const std::int64_t lin = current.linear_index(e->index);
      const double r = current.values[lin] - e->value;
      loss += rho(cfg.loss, r);
      fold_zero_loss += rho(cfg.loss, -e->value);
      g.values[lin] += drho(cfg.loss, r);
      abs_residuals.push_back(std::abs(r));
    }

    IterateRecord rec;
    rec.iter = l;
    rec.loss = loss;
    rec.mu = incoherence(res.factors);
    ti.fill(rec, current);
    if (!std::isfinite(loss) || loss > 10.0 * std::max(fold_zero_loss, 1e-300)) {
      tr.records.push_back(rec);
      tr.status = SolveStatus::Diverged;
      return res;
    }

    const TangentVector tv = all_zero(g) ? zero_tangent(res.factors)
                                         : tangent_project(res.factors, g);
    rec.pgrad_fro = tv.norm();
    if (l == 0 && sched.eta0 < 0.0) {
      // First-fold probe: the first step moves about a third of the scale.
      sched.eta0 = tv.norm() > 0.0 ? 0.3 * norms(current).fro / tv.norm() : 1.0;
      tr.resolved_eta0 = sched.eta0;
    }

    if (phase == 1) {
      bool want_switch = false;
      if (sched.fixed_l1 >= 0) {
        want_switch = l >= sched.fixed_l1;
      } else if (l >= sched.window) {
        const double loss0 = tr.records[0].loss;
        const double base = tr.records[l - sched.window].loss;
        const double progress = loss0 - loss;
        want_switch = progress > 0.0 &&
                      (base - loss) <= sched.stagnation_tol * std::max(progress, 1e-300);
      }
      if (want_switch) {
        double eta2 = sched.eta_const;
        if (eta2 < 0.0) {
          const std::size_t mid = abs_residuals.size() / 2;
          std::nth_element(abs_residuals.begin(), abs_residuals.begin() + mid, abs_residuals.end());
          eta2 = sched.eta_const_factor * abs_residuals[mid];
        }
        if (eta2 > 0.0) {
          phase = 2;
          tr.phase_switch_iter = l;
          sched.eta_const = eta2;
          tr.resolved_eta_const = eta2;
        }
      }
    }

    rec.phase = phase;
    rec.eta = step_at(sched, l, phase);
    tr.records.push_back(rec);

    res.factors = retract_efficient(res.factors, tv, rec.eta);
    current = tucker_reconstruct(res.factors);
  }

  // Final point, evaluated on the last fold for continuity of the trace.
  IterateRecord rec;
  rec.iter = iters;
  rec.phase = phase;
  rec.eta = 0.0;
  rec.mu = incoherence(res.factors);
  ti.fill(rec, current);
  double loss = 0.0;
  for (const Observation* e = obs.fold_begin(obs.fold_count - 1); e != obs.fold_end(obs.fold_count - 1); ++e)
    loss += rho(cfg.loss, current.values[current.linear_index(e->index)] - e->value);
  rec.loss = loss;
  tr.records.push_back(rec);
  tr.status = SolveStatus::MaxIters;
  return res;
}

}  // namespace rtucker
