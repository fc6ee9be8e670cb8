#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "rtucker/init.hpp"
#include "rtucker/synth.hpp"

using namespace rtucker;

TEST_CASE("truncate_entries clamps and is idempotent") {
  DenseTensor t({2, 2}, {-9.0, 1.0, 2.9, 3.2});
  DenseTensor got = truncate_entries(t, 3.0);
  CHECK(got.values == std::vector<double>{-3.0, 1.0, 2.9, 3.0});

  Rng rng(81);
  DenseTensor y = oracles::random_tensor({3, 4, 5}, rng);
  const double tau = 0.8;
  DenseTensor once = truncate_entries(y, tau);
  for (std::size_t i = 0; i < y.values.size(); ++i)
    CHECK(once.values[i] == std::clamp(y.values[i], -tau, tau));
  CHECK(truncate_entries(once, tau).values == once.values);
  CHECK(norms(once).sup <= tau);

  DenseTensor small = truncate_entries(y, 100.0);
  CHECK(small.values == y.values);
  CHECK_THROWS_AS(truncate_entries(y, 0.0), std::invalid_argument);
}

TEST_CASE("spectral_init recovers exact low rank when tau is slack") {
  auto [truth, diag] = gen_lowrank({8, 8, 8}, {2, 2, 2}, 5);
  DenseTensor y = tucker_reconstruct(truth);
  InitConfig cfg;
  cfg.ranks = {2, 2, 2};
  cfg.tau = 2.0 * norms(y).sup;
  TuckerFactors f = spectral_init(y, cfg);
  f.validate();
  CHECK(oracles::rel_fro_err(tucker_reconstruct(f), y) < 1e-10);
}

TEST_CASE("spectral_init lands in the basin under heavy-tailed noise") {
  // fixed-seed regime: 50^3, student-t nu = 2.01, ||T*||_F / E|xi| = 1500
  const std::vector<int> dims{50, 50, 50};
  NoiseModel noise = NoiseModel::student_t(2.01);
  auto [truth, diag] = gen_lowrank(dims, {2, 2, 2}, 2024, 1500.0 * noise.mean_abs());
  DenseTensor dense = tucker_reconstruct(truth);
  DenseTensor y = add_scaled(dense, gen_noise(dims, noise, 99), 1.0);
  InitConfig cfg;
  cfg.ranks = {2, 2, 2};  // tau auto
  TuckerFactors f = spectral_init(y, cfg);
  CHECK(oracles::fro_diff(tucker_reconstruct(f), dense) / norms(dense).fro < 0.5);
}

TEST_CASE("spectral_init error ignores the outlier magnitude once clipped") {
  const std::vector<int> dims{30, 30, 30};
  auto [truth, diag] = gen_lowrank(dims, {2, 2, 2}, 7);
  DenseTensor dense = tucker_reconstruct(truth);

  CorruptionModel cm;
  cm.alpha = 0.01;
  cm.magnitude = 1.0;  // scaled below through ref_sup
  cm.seed = 40;
  DenseTensor support = gen_corruption(dims, cm, 1.0);

  InitConfig cfg;
  cfg.ranks = {2, 2, 2};
  cfg.tau = 500.0;
  double errs[2];
  const double mags[2] = {1e6, 1e9};
  for (int i = 0; i < 2; ++i) {
    DenseTensor y = add_scaled(dense, support, mags[i]);
    TuckerFactors f = spectral_init(y, cfg);
    errs[i] = oracles::fro_diff(tucker_reconstruct(f), dense);
  }
  CHECK(std::abs(errs[0] - errs[1]) <= 1e-8 * std::max(errs[0], 1e-300));
}

TEST_CASE("estimate_noise_scale is the median absolute residual") {
  DenseTensor y({2, 2}, {0.0, 0.0, 0.0, 0.0});
  CHECK(estimate_noise_scale(y, y) == 0.0);
  DenseTensor t({2, 2}, {1.0, -2.0, 3.0, -4.0});
  CHECK(estimate_noise_scale(t, y) == doctest::Approx(2.5).epsilon(1e-15));

  DenseTensor g({50, 40, 50}, 0.0);
  Rng rng(82);
  for (double& v : g.values) v = rng.normal();
  DenseTensor zero(g.dims, 0.0);
  CHECK(std::abs(estimate_noise_scale(g, zero) - 0.6745) < 0.02);
}

TEST_CASE("estimate_tau_auto percentile behavior") {
  DenseTensor c({10, 10}, 3.25);
  CHECK(estimate_tau_auto(c) == 3.25);

  // 1000 entries, one extreme: tau must separate bulk from outlier
  Rng rng(83);
  DenseTensor y({10, 10, 10}, 0.0);
  double bulk_max = 0.0;
  for (double& v : y.values) {
    v = rng.uniform();
    bulk_max = std::max(bulk_max, std::abs(v));
  }
  y.values[123] = 1e6;
  const double tau = estimate_tau_auto(y);
  CHECK(tau >= bulk_max * (1.0 - 1e-12));
  CHECK(tau <= 1e6);

  // sort-based oracle with the same interpolation convention
  std::vector<double> a;
  for (double v : y.values) a.push_back(std::abs(v));
  std::sort(a.begin(), a.end());
  const double pos = 0.999 * static_cast<double>(a.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double want = a[lo] + (pos - lo) * (a[lo + 1] - a[lo]);
  CHECK(tau == want);

  // power-of-two scaling is exactly equivariant
  DenseTensor scaled = y;
  for (double& v : scaled.values) v *= 4.0;
  CHECK(estimate_tau_auto(scaled) == 4.0 * tau);
}
