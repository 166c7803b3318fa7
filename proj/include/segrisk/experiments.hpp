#pragma once
// Experiment protocol: repeated random calibration/test splits, alpha
// sweeps, the calibration-to-test ratio ablation, and the test-side
// metrics (empirical FDR/FNR, coverage rate, prediction-set size).

#include <segrisk/calibration.hpp>
#include <segrisk/types.hpp>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace segrisk {

struct SplitSpec {
  double cal_fraction = 0.5;  // in (0, 1); calibration size = round half up
  int n_trials = 10;
  std::uint64_t seed = 0;
};

// Deterministic partition of [0, n): Fisher-Yates keyed by rng stream
// (seed, trial), calibration takes round(n * cal_fraction) indices, both
// sides returned in ascending order. Throws TooFewSamples when either
// side would come out empty.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_indices(std::size_t n_samples, const SplitSpec& spec, int trial);

std::pair<std::vector<Sample>, std::vector<Sample>>
split(std::span<const Sample> samples, const SplitSpec& spec, int trial);

struct TrialReport {
  int trial_index = 0;
  double alpha = 0.0;
  LossKind kind = LossKind::FNR;
  double cal_fraction = 0.0;
  double lambda_hat = 1.0;  // 1.0 when infeasible; metrics are then evaluated there, uncertified
  bool feasible = false;
  double mean_test_fdr = 0.0;
  double mean_test_fnr = 0.0;
  double ecr = 0.0;   // fraction of test samples with per-sample loss <= alpha
  double apss = 0.0;  // mean prediction-set size in pixels
  std::int64_t n_cal = 0;
  std::int64_t n_test = 0;
  // in-memory extra (not serialized): L_n(lambda_hat) on the calibration split
  double achieved_calibration_loss = 0.0;
};

// Calibrates on `cal` with spec.kind and evaluates everything on `test`.
TrialReport run_trial(std::span<const Sample> cal, std::span<const Sample> test,
                      const RiskSpec& spec, const LambdaGrid& grid);

// Fraction of test samples whose per-sample loss at lambda_hat is <= alpha.
double ecr(std::span<const Sample> test, double lambda_hat, double alpha, LossKind kind);

// Mean prediction-set size at lambda_hat, in pixels.
double apss(std::span<const Sample> test, double lambda_hat);

struct MetricStat {
  double mean = 0.0;
  double stddev = 0.0;  // population std over the feasible trials
};

struct SweepRow {
  double alpha = 0.0;
  double cal_fraction = 0.0;
  LossKind kind = LossKind::FNR;
  int n_trials = 0;
  int n_feasible = 0;  // infeasible trials stay recorded but are excluded from the stats
  MetricStat lambda_hat, test_fdr, test_fnr, ecr, apss;
};

struct SweepReport {
  LossKind kind = LossKind::FNR;
  std::vector<TrialReport> trials;  // alpha-major, trial-minor order
  std::vector<SweepRow> rows;       // one per alpha (or per ratio)
};

// One row per alpha with split_spec.n_trials trials each. The partition
// for trial t is shared across all alphas, and per-sample loss curves are
// computed once for the whole dataset.
SweepReport alpha_sweep(std::span<const Sample> samples, const SplitSpec& split_spec,
                        LossKind kind, const LambdaGrid& grid, std::span<const double> alphas);

// One partition per ratio at a fixed alpha; ratios are calibration
// fractions. The partition stream for ratio index k is trial k of `seed`.
SweepReport ratio_sweep(std::span<const Sample> samples, std::span<const double> ratios,
                        LossKind kind, const LambdaGrid& grid, double alpha, std::uint64_t seed);

}  // namespace segrisk
