#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rtucker/init.hpp"
#include "rtucker/io.hpp"
#include "rtucker/solver.hpp"
#include "rtucker/synth.hpp"

namespace rtucker {

// Optional per-experiment solver overrides; negative values mean "default".
struct SolverOverrides {
  int max_iters = -1;
  double q = -1.0;
  double eta0 = -1.0;
  double eta_const = -1.0;
  double tol = -1.0;
  int fixed_l1 = -1;
  bool enable_trim = false;
  double tau1 = -1.0;
  double tau2 = -1.0;
  double delta = -1.0;     // PseudoHuber smoothing; < 0 resolves from the residual scale
  double tau_init = -1.0;  // spectral-init truncation; < 0 resolves per init_rule
  double eta0_scale = 1.0;       // multiplies the auto-resolved eta0
  double eta_const_factor = -1.0;  // auto eta_const = factor x median residual
  // Auto truncation rule: "mad" clips at 10x the MAD scale (robust to gross
  // corruption), "quantile" clips at the 99.9th percentile of |Y|.
  std::string init_rule = "mad";
};

struct ExperimentSpec {
  std::string name = "experiment";
  std::vector<int> dims;
  std::vector<int> ranks;
  NoiseModel noise;
  std::optional<CorruptionModel> corruption;
  double snr = -1.0;  // target ||T*||_F / E|xi|; < 0 leaves the draw unscaled
  std::vector<LossSpec> losses;
  int replications = 1;
  std::uint64_t base_seed = 1;          // seed of replication i = base_seed + i
  std::vector<std::uint64_t> seeds;     // overrides base_seed when non-empty
  SolverOverrides solver;

  static ExperimentSpec from_json_file(const std::string& path);
  void validate() const;
};

struct ResultRow {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string loss;
  double alpha = 0.0;
  double snr = 0.0;
  double final_err_fro = 0.0;  // relative: ||That - T*||_F / ||T*||_F
  double final_err_sup = 0.0;  // relative: sup-norm ratio
  int iters = 0;
  double wall_time = 0.0;
};

// Synthetic instance shared by every loss of one replication.
struct SyntheticInstance {
  TuckerFactors truth;
  DenseTensor truth_dense;
  DenseTensor y;
  SignalDiagnostics diagnostics;
};

SyntheticInstance make_instance(const ExperimentSpec& spec, std::uint64_t seed);

// Robust truncation level for spectral initialization on possibly corrupted
// data: 10 x the MAD scale of the entries.
double robust_init_tau(const DenseTensor& y);

// Spectral initialization that keeps the better of the truncated and the
// plain HOSVD starts, judged by the solve loss.
TuckerFactors pipeline_init(const DenseTensor& y, const std::vector<int>& ranks, double tau,
                            const LossSpec& loss);

// Full pipeline for one (instance, loss): init, schedule resolution, solve.
SolveResult run_pipeline(const DenseTensor& y, const std::vector<int>& ranks, LossSpec loss,
                         const SolverOverrides& ov, const DenseTensor* truth);

struct CompletionInitOptions {
  double tau = -1.0;        // fill truncation; < 0 uses the 99.9th-percentile auto level
  bool refine = true;       // descend on the fold-0 subsample after the spectral start
  int restarts = 96;        // extra randomized starts tried when the fit stays poor
  int refine_iters = 400;
  std::uint64_t seed = 0;   // restart randomization; the result is deterministic
};

// Completion start, owning fold 0 entirely. Spectral part: the
// inverse-propensity rescaled sparse fill (d*/n) * sum y_i e_{w_i}
// (duplicates summed), entrywise-truncated, factors from diagonal-deleted
// Gram matrices of the matricizations (the deletion removes the sampling
// variance that sits on the Gram diagonal). The fill alone is too noisy at
// desk-scale sample sizes, so a decaying-step l1 descent on the fold-0
// subsample refines it; restarts are scored by the observable fold-0 loss.
TuckerFactors completion_init(const ObservationSet& obs, const std::vector<int>& ranks,
                              const CompletionInitOptions& opts = {});
TuckerFactors completion_init(const ObservationSet& obs, const std::vector<int>& ranks,
                              double tau);

// Runs every (replication, loss) job, one thread per worker (capped by the
// ROBUST_TUCKER_THREADS environment variable), writes results.csv and a trace
// CSV per run under out_dir. With resume, completed (experiment, seed, loss)
// keys are skipped. Rows are ordered by (experiment, seed, loss).
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const std::string& out_dir,
                                      bool resume);

}  // namespace rtucker
