// Command-line front end: decompose / synth / experiment / complete / info.
//
// Exit codes: 0 success, 1 invalid flags or config, 2 unreadable or malformed
// input file, 3 solver divergence.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rtucker/experiment.hpp"
#include "rtucker/init.hpp"
#include "rtucker/io.hpp"
#include "rtucker/solver.hpp"
#include "rtucker/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rtucker;

namespace {

struct CommonSolverFlags {
  std::string loss = "quantile";
  double delta = -1.0;
  double q = -1.0;
  double eta0 = -1.0;
  double eta_const = -1.0;
  int max_iters = 300;
  double tol = 1e-10;
  bool trim = false;
  double tau1 = -1.0;
  double tau2 = -1.0;
  double tau_init = -1.0;
  int fixed_l1 = -1;
  std::uint64_t seed = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--loss", loss, "square|pseudohuber|quantile")->default_val(loss);
    cmd->add_option("--delta", delta, "loss parameter (pseudohuber smoothing / quantile level)");
    cmd->add_option("--q", q, "phase-one step decay in (0,1)");
    cmd->add_option("--eta0", eta0, "initial step size");
    cmd->add_option("--eta", eta_const, "phase-two constant step size");
    cmd->add_option("--max-iters", max_iters, "iteration cap")->default_val(max_iters);
    cmd->add_option("--tol", tol, "relative loss-change stop")->default_val(tol);
    cmd->add_flag("--trim", trim, "enable phase-two truncation/trimming (quantile loss)");
    cmd->add_option("--tau1", tau1, "truncation level (auto when omitted)");
    cmd->add_option("--tau2", tau2, "trimming level (auto when omitted)");
    cmd->add_option("--tau-init", tau_init, "spectral-init truncation level (auto when omitted)");
    cmd->add_option("--fixed-l1", fixed_l1, "fixed phase-switch iteration (stagnation rule when omitted)");
    cmd->add_option("--seed", seed, "random seed")->default_val(seed);
  }

  LossSpec loss_spec() const {
    if (loss == "square") return LossSpec::square();
    if (loss == "pseudohuber") return {LossKind::PseudoHuber, delta};
    if (loss == "quantile") return LossSpec::quantile(delta < 0.0 ? 0.5 : delta);
    throw CLI::ValidationError("--loss", "unknown loss: " + loss);
  }

  SolverOverrides overrides() const {
    SolverOverrides ov;
    ov.max_iters = max_iters;
    ov.q = q;
    ov.eta0 = eta0;
    ov.eta_const = eta_const;
    ov.tol = tol;
    ov.fixed_l1 = fixed_l1;
    ov.enable_trim = trim;
    ov.tau1 = tau1;
    ov.tau2 = tau2;
    ov.delta = delta;
    ov.tau_init = tau_init;
    return ov;
  }
};

void write_factor_files(const std::string& out_dir, const TuckerFactors& f) {
  fs::create_directories(out_dir);
  write_tensor_binary((fs::path(out_dir) / "core.tnsr").string(), f.core);
  for (int k = 0; k < f.order(); ++k)
    write_matrix_binary((fs::path(out_dir) / ("factor_" + std::to_string(k) + ".tnsr")).string(),
                        f.factors[k]);
}

int write_solution(const std::string& out_dir, const SolveResult& out, double rel_residual) {
  write_factor_files(out_dir, out.factors);
  write_trace_csv((fs::path(out_dir) / "trace.csv").string(), out.trace);
  const SignalDiagnostics diag = estimate_signal_diagnostics(out.factors);

  json summary;
  summary["final_loss"] = out.trace.final_record().loss;
  summary["iters"] = out.trace.final_record().iter;
  summary["mu"] = diag.mu;
  summary["lambda_min"] = diag.lambda_min;
  summary["kappa"] = diag.kappa;
  summary["final_rel_residual"] = rel_residual;
  summary["status"] = out.trace.status == SolveStatus::Converged   ? "converged"
                      : out.trace.status == SolveStatus::MaxIters ? "max_iters"
                                                                  : "diverged";
  std::ofstream os(fs::path(out_dir) / "summary.json");
  os << summary.dump(2) << "\n";

  if (out.trace.status == SolveStatus::Diverged) {
    std::cerr << "solver diverged; trace written to " << out_dir << "\n";
    return 3;
  }
  return 0;
}

double dense_rel_residual(const TuckerFactors& f, const DenseTensor& y) {
  const DenseTensor fit = tucker_reconstruct(f);
  double rss = 0.0;
  for (std::size_t i = 0; i < fit.values.size(); ++i) {
    const double d = fit.values[i] - y.values[i];
    rss += d * d;
  }
  const double yfro = norms(y).fro;
  return yfro > 0.0 ? std::sqrt(rss) / yfro : std::sqrt(rss);
}

int cmd_decompose(const std::string& input, const std::vector<int>& dims,
                  const std::vector<int>& ranks, const CommonSolverFlags& flags,
                  const std::string& out_dir) {
  std::optional<std::vector<int>> dims_opt;
  if (!dims.empty()) dims_opt = dims;
  const DenseTensor y = read_tensor_any(input, dims_opt);
  SolveResult out = run_pipeline(y, ranks, flags.loss_spec(), flags.overrides(), nullptr);
  return write_solution(out_dir, out, dense_rel_residual(out.factors, y));
}

int cmd_synth(const std::vector<int>& dims, const std::vector<int>& ranks,
              const std::string& noise_kind, double sigma, double nu, double shape, double scale,
              double snr, double alpha, double magnitude, const std::string& sign,
              std::uint64_t seed, const std::string& out_dir) {
  NoiseModel noise = NoiseModel::none();
  if (noise_kind == "gaussian") noise = NoiseModel::gaussian(sigma);
  else if (noise_kind == "studentt") noise = NoiseModel::student_t(nu, scale);
  else if (noise_kind == "pareto") noise = NoiseModel::pareto_symmetric(shape, scale);
  else if (noise_kind != "none") throw CLI::ValidationError("--noise", "unknown noise: " + noise_kind);

  double target_fro = -1.0;
  if (snr > 0.0) target_fro = snr * noise.mean_abs();
  auto [truth, diag] = gen_lowrank(dims, ranks, seed, target_fro);
  DenseTensor dense = tucker_reconstruct(truth);
  DenseTensor y = dense;
  if (noise.kind != NoiseModel::Kind::None)
    y = add_scaled(y, gen_noise(dims, noise, seed + 1000003), 1.0);
  if (alpha > 0.0) {
    CorruptionModel cm;
    cm.alpha = alpha;
    cm.magnitude = magnitude;
    cm.sign = sign == "random" ? CorruptionModel::Sign::Random : CorruptionModel::Sign::Positive;
    cm.seed = seed + 2000003;
    y = add_scaled(y, gen_corruption(dims, cm, norms(dense).sup), 1.0);
  }

  fs::create_directories(out_dir);
  write_tensor_binary((fs::path(out_dir) / "y.tnsr").string(), y);
  write_tensor_binary((fs::path(out_dir) / "truth.tnsr").string(), dense);
  json meta;
  meta["seed"] = seed;
  meta["mu"] = diag.mu;
  meta["lambda_min"] = diag.lambda_min;
  meta["kappa"] = diag.kappa;
  meta["truth_fro"] = norms(dense).fro;
  std::ofstream os(fs::path(out_dir) / "meta.json");
  os << meta.dump(2) << "\n";
  return 0;
}

int cmd_complete(const std::string& input, const std::vector<int>& dims,
                 const std::vector<int>& ranks, int folds, const CommonSolverFlags& flags,
                 const std::string& out_dir) {
  std::int64_t dropped = 0;
  ObservationSet obs = read_observations_triplet(input, dims, folds, &dropped);
  if (dropped > 0)
    std::cerr << "warning: dropped " << dropped
              << " trailing observations not filling a whole fold\n";

  TuckerFactors t0 = completion_init(obs, ranks, flags.tau_init);

  SolverConfig cfg;
  cfg.loss = flags.loss_spec();
  if (cfg.loss.kind == LossKind::PseudoHuber && cfg.loss.delta <= 0.0)
    throw CLI::ValidationError("--delta", "pseudohuber completion needs an explicit delta");
  cfg.ranks = ranks;
  cfg.max_iters = folds - 1;
  cfg.schedule.q = flags.q > 0.0 ? flags.q : 0.78;
  cfg.schedule.eta0 = flags.eta0;
  cfg.schedule.eta_const = flags.eta_const;
  cfg.schedule.fixed_l1 = flags.fixed_l1;

  SolveResult out = complete_sample_split(obs, cfg, t0);

  // Residual summary: mean absolute misfit over all observed entries,
  // relative to the mean absolute observed value.
  const DenseTensor fit = tucker_reconstruct(out.factors);
  double misfit = 0.0, scale = 0.0;
  for (const Observation& e : obs.entries) {
    misfit += std::abs(fit.values[fit.linear_index(e.index)] - e.value);
    scale += std::abs(e.value);
  }
  return write_solution(out_dir, out, scale > 0.0 ? misfit / scale : misfit);
}

int cmd_info(const std::string& input, const std::vector<int>& dims,
             const std::vector<int>& ranks) {
  std::optional<std::vector<int>> dims_opt;
  if (!dims.empty()) dims_opt = dims;
  const DenseTensor t = read_tensor_any(input, dims_opt);
  const Norms n = norms(t);
  std::cout << "order: " << t.order() << "\ndims:";
  for (int d : t.dims) std::cout << " " << d;
  std::cout << "\nentries: " << t.size() << "\nfro: " << format_double(n.fro)
            << "\nl1: " << format_double(n.l1) << "\nsup: " << format_double(n.sup) << "\n";
  if (!ranks.empty()) {
    const SignalDiagnostics diag = estimate_signal_diagnostics(t, ranks);
    std::cout << "dof: " << dof(t.dims, ranks) << "\nmu: " << format_double(diag.mu)
              << "\nlambda_min: " << format_double(diag.lambda_min)
              << "\nlambda_max: " << format_double(diag.lambda_max)
              << "\nkappa: " << format_double(diag.kappa) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust low-rank Tucker decomposition"};
  app.require_subcommand(1);

  // decompose
  auto* dec = app.add_subcommand("decompose", "robust Tucker decomposition of a tensor file");
  std::string dec_input, dec_out = "decomposed";
  std::vector<int> dec_dims, dec_ranks;
  CommonSolverFlags dec_flags;
  dec->add_option("input", dec_input, "tensor file (binary TNSR or triplet CSV)")->required();
  dec->add_option("--ranks", dec_ranks, "Tucker ranks r1,r2,...")->required()->delimiter(',');
  dec->add_option("--dims", dec_dims, "dims override for triplet input")->delimiter(',');
  dec_flags.attach(dec);
  dec->add_option("--out", dec_out, "output directory")->default_val(dec_out);

  // synth
  auto* syn = app.add_subcommand("synth", "generate a synthetic instance");
  std::vector<int> syn_dims, syn_ranks;
  std::string syn_noise = "none", syn_sign = "positive", syn_out = "synth";
  double syn_sigma = 1.0, syn_nu = 2.01, syn_shape = 3.0, syn_scale = 1.0;
  double syn_snr = -1.0, syn_alpha = 0.0, syn_mag = 100.0;
  std::uint64_t syn_seed = 1;
  syn->add_option("--dims", syn_dims, "tensor dims")->required()->delimiter(',');
  syn->add_option("--ranks", syn_ranks, "Tucker ranks")->required()->delimiter(',');
  syn->add_option("--noise", syn_noise, "none|gaussian|studentt|pareto")->default_val(syn_noise);
  syn->add_option("--sigma", syn_sigma, "gaussian sigma")->default_val(syn_sigma);
  syn->add_option("--nu", syn_nu, "student-t degrees of freedom")->default_val(syn_nu);
  syn->add_option("--shape", syn_shape, "pareto shape")->default_val(syn_shape);
  syn->add_option("--scale", syn_scale, "student-t / pareto scale")->default_val(syn_scale);
  syn->add_option("--snr", syn_snr, "target ||T*||_F / E|xi|");
  syn->add_option("--alpha", syn_alpha, "corruption rate")->default_val(syn_alpha);
  syn->add_option("--magnitude", syn_mag, "corruption magnitude (x sup of truth)")->default_val(syn_mag);
  syn->add_option("--sign", syn_sign, "positive|random")->default_val(syn_sign);
  syn->add_option("--seed", syn_seed, "random seed")->default_val(syn_seed);
  syn->add_option("--out", syn_out, "output directory")->default_val(syn_out);

  // experiment
  auto* exp = app.add_subcommand("experiment", "run an experiment spec (JSON)");
  std::string exp_spec, exp_out;
  bool exp_resume = false;
  exp->add_option("spec", exp_spec, "experiment spec JSON file")->required();
  exp->add_option("--out", exp_out, "output directory (default runs/<name>)");
  exp->add_flag("--resume", exp_resume, "skip (experiment, seed, loss) keys already in results.csv");

  // complete
  auto* com = app.add_subcommand("complete", "tensor completion from sampled entries");
  std::string com_input, com_out = "completed";
  std::vector<int> com_dims, com_ranks;
  int com_folds = 0;
  CommonSolverFlags com_flags;
  com->add_option("input", com_input, "observations triplet CSV")->required();
  com->add_option("--dims", com_dims, "tensor dims")->required()->delimiter(',');
  com->add_option("--ranks", com_ranks, "Tucker ranks")->required()->delimiter(',');
  com->add_option("--folds", com_folds, "fold count M+1 (fold 0 initializes, M iterations)")
      ->required()
      ->check(CLI::PositiveNumber);
  com_flags.attach(com);
  com->add_option("--out", com_out, "output directory")->default_val(com_out);

  // info
  auto* inf = app.add_subcommand("info", "print tensor file facts");
  std::string inf_input;
  std::vector<int> inf_dims, inf_ranks;
  inf->add_option("input", inf_input, "tensor file")->required();
  inf->add_option("--dims", inf_dims, "dims override for triplet input")->delimiter(',');
  inf->add_option("--ranks", inf_ranks, "report rank-r diagnostics")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (dec->parsed()) return cmd_decompose(dec_input, dec_dims, dec_ranks, dec_flags, dec_out);
    if (syn->parsed())
      return cmd_synth(syn_dims, syn_ranks, syn_noise, syn_sigma, syn_nu, syn_shape, syn_scale,
                       syn_snr, syn_alpha, syn_mag, syn_sign, syn_seed, syn_out);
    if (exp->parsed()) {
      ExperimentSpec spec = ExperimentSpec::from_json_file(exp_spec);
      const std::string out = exp_out.empty() ? ("runs/" + spec.name) : exp_out;
      run_experiment(spec, out, exp_resume);
      std::cout << "results written to " << out << "/results.csv\n";
      return 0;
    }
    if (com->parsed()) {
      if (com_folds < 2) {
        std::cerr << "error: --folds must be at least 2 (fold 0 initializes)\n";
        return 1;
      }
      return cmd_complete(com_input, com_dims, com_ranks, com_folds, com_flags, com_out);
    }
    if (inf->parsed()) return cmd_info(inf_input, inf_dims, inf_ranks);
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
