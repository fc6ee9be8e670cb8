#pragma once

#include <cstdint>
#include <vector>

#include "rtucker/losses.hpp"
#include "rtucker/observations.hpp"
#include "rtucker/tangent.hpp"

namespace rtucker {

struct SolverConfig {
  LossSpec loss = LossSpec::absolute();
  std::vector<int> ranks;
  StepSchedule schedule;
  int max_iters = 300;
  double tol = 1e-10;       // stop when the relative loss change falls below this
  double tau1 = -1.0;       // < 0: resolved at the phase switch from the residual scale
  double tau2 = -1.0;       // < 0: resolved at the phase switch from the incoherence
  bool enable_trim = false;
  std::int64_t seed = 0;    // carried for orchestration; the solvers themselves are deterministic

  void validate() const;
};

enum class SolveStatus { Converged, MaxIters, Diverged };

struct IterateRecord {
  int iter = 0;
  int phase = 1;
  double eta = 0.0;
  double loss = 0.0;
  double pgrad_fro = 0.0;
  double err_fro = 0.0;  // ||T_l - T*||_F, valid when the trace has ground truth
  double err_sup = 0.0;
  double mu = 0.0;
};

struct IterateTrace {
  std::vector<IterateRecord> records;
  bool has_truth = false;
  int phase_switch_iter = -1;  // -1 when the run never left phase one
  SolveStatus status = SolveStatus::MaxIters;

  // Ground-truth signal diagnostics, valid when has_truth.
  double truth_lambda_min = 0.0;
  double truth_lambda_max = 0.0;
  double truth_kappa = 0.0;

  // Values the run actually used after auto resolution.
  double resolved_eta0 = 0.0;
  double resolved_eta_const = 0.0;
  double resolved_tau1 = 0.0;
  double resolved_tau2 = 0.0;

  const IterateRecord& final_record() const { return records.back(); }
};

struct SolveResult {
  TuckerFactors factors;
  IterateTrace trace;
};

// Entrywise clip of t to within tau1 of the reference b.
DenseTensor trun(const DenseTensor& t, const DenseTensor& b, double tau1);

// Entrywise magnitude clip at sqrt(tau2 / d*) * ||t||_F, the norm taken on the
// input tensor.
DenseTensor trim(const DenseTensor& t, double tau2);

// Riemannian (sub-)gradient descent: T_{l+1} = HOSVD_r(T_l - eta_l P_T(G_l))
// with the two-phase step schedule. Square loss gives the classical RGrad
// baseline. Pass the ground truth to get error diagnostics in the trace.
SolveResult rsgrad(const DenseTensor& y, const SolverConfig& cfg, const TuckerFactors& t0,
                   const DenseTensor* truth = nullptr);

// Quantile-loss variant whose phase-two retraction applies Trun (against the
// phase-one output) and Trim before the HOSVD when enable_trim is set.
SolveResult rsgrad_quantile_trim(const DenseTensor& y, const SolverConfig& cfg,
                                 const TuckerFactors& t0, const DenseTensor* truth = nullptr);

// Sample-splitting descent for the trace-regression model: fold 0 is reserved
// for initialization, iteration l consumes fold l+1, and the run takes exactly
// fold_count - 1 steps. Duplicate indices are summed in loss and sub-gradient.
SolveResult complete_sample_split(const ObservationSet& obs, const SolverConfig& cfg,
                                  const TuckerFactors& t0, const DenseTensor* truth = nullptr);

}  // namespace rtucker
