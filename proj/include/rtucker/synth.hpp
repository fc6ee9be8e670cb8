#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rtucker/observations.hpp"
#include "rtucker/tucker.hpp"

namespace rtucker {

// Entrywise noise law, zero-symmetric by construction. mean_abs() is the
// closed-form E|xi| used by the SNR convention ||T*||_F / E|xi|.
struct NoiseModel {
  enum class Kind { None, Gaussian, StudentT, ParetoSymmetric };
  Kind kind = Kind::None;
  double sigma = 1.0;   // Gaussian
  double nu = 3.0;      // StudentT degrees of freedom
  double shape = 3.0;   // ParetoSymmetric tail index
  double scale = 1.0;   // StudentT / ParetoSymmetric scale

  static NoiseModel none() { return {}; }
  static NoiseModel gaussian(double sigma);
  static NoiseModel student_t(double nu, double scale = 1.0);
  static NoiseModel pareto_symmetric(double shape, double scale = 1.0);

  void validate() const;
  double mean_abs() const;  // throws if infinite (nu <= 1 or shape <= 1)
  std::string name() const;
};

// alpha-fraction sparse corruption: at most ceil(alpha * d_k^-) nonzeros in
// every mode-k slice; nonzero value = magnitude * ref_sup, sign per model.
struct CorruptionModel {
  double alpha = 0.0;
  double magnitude = 100.0;
  enum class Sign { Positive, Random } sign = Sign::Positive;
  std::uint64_t seed = 0;

  void validate() const;
};

// Random incoherent low-rank ground truth: factors are orthonormalized i.i.d.
// Gaussian matrices, core i.i.d. Gaussian rescaled to target_fro when
// target_fro > 0. Deterministic given seed.
std::pair<TuckerFactors, SignalDiagnostics> gen_lowrank(const std::vector<int>& dims,
                                                        const std::vector<int>& ranks,
                                                        std::uint64_t seed,
                                                        double target_fro = -1.0);

DenseTensor gen_noise(const std::vector<int>& dims, const NoiseModel& model, std::uint64_t seed);

// Support sampled uniformly without replacement, then repaired by removal
// until every slice satisfies the cap. ref_sup scales the nonzero values.
DenseTensor gen_corruption(const std::vector<int>& dims, const CorruptionModel& model,
                           double ref_sup);

// n_per_fold * folds observations with indices uniform with replacement:
//   y_i = T*[w_i] + xi_i + s_i,   s_i nonzero with probability alpha.
ObservationSet gen_observations(const TuckerFactors& truth, const NoiseModel& noise,
                                const CorruptionModel& corruption, std::int64_t n_per_fold,
                                int folds, std::uint64_t seed);

}  // namespace rtucker
