#include <segrisk/experiments.hpp>

#include <segrisk/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace segrisk {

namespace {

struct DatasetCurves {
  std::vector<SampleCurves> per_sample;
};

DatasetCurves compute_curves(std::span<const Sample> samples, const LambdaGrid& grid) {
  DatasetCurves out;
  out.per_sample.reserve(samples.size());
  for (const Sample& s : samples) out.per_sample.push_back(sample_curves(s, grid));
  return out;
}

// Shared evaluator behind run_trial and the sweeps: calibrate on the cal
// indices, evaluate every metric on the test indices. Summations run in
// ascending index order, matching what select_threshold over the same
// curves would compute bit for bit.
TrialReport evaluate_trial(const DatasetCurves& curves, const LambdaGrid& grid,
                           std::span<const std::size_t> cal, std::span<const std::size_t> test,
                           const RiskSpec& spec, int trial_index, double cal_fraction) {
  validate(spec);
  if (cal.empty()) raise(ErrorCode::EmptyCalibrationSet, "calibration split is empty");
  if (test.empty()) raise(ErrorCode::TooFewSamples, "test split is empty");

  Eigen::ArrayXd avg = Eigen::ArrayXd::Zero(grid.size());
  for (std::size_t i : cal)
    avg += spec.kind == LossKind::FDR ? curves.per_sample[i].fdr : curves.per_sample[i].fnr;
  avg /= static_cast<double>(cal.size());

  const SelectionOutcome sel =
      select_threshold_index(avg, spec, static_cast<std::int64_t>(cal.size()));
  const Eigen::Index j = sel.index;

  TrialReport r;
  r.trial_index = trial_index;
  r.alpha = spec.alpha;
  r.kind = spec.kind;
  r.cal_fraction = cal_fraction;
  r.feasible = sel.feasible;
  r.lambda_hat = grid[j];
  r.n_cal = static_cast<std::int64_t>(cal.size());
  r.n_test = static_cast<std::int64_t>(test.size());
  r.achieved_calibration_loss = avg[j];

  double fdr_sum = 0.0, fnr_sum = 0.0, size_sum = 0.0;
  std::int64_t covered = 0;
  for (std::size_t i : test) {
    const SampleCurves& c = curves.per_sample[i];
    fdr_sum += c.fdr[j];
    fnr_sum += c.fnr[j];
    size_sum += c.set_size[j];
    const double own = spec.kind == LossKind::FDR ? c.fdr[j] : c.fnr[j];
    if (own <= spec.alpha) ++covered;
  }
  const double n_test = static_cast<double>(test.size());
  r.mean_test_fdr = fdr_sum / n_test;
  r.mean_test_fnr = fnr_sum / n_test;
  r.ecr = static_cast<double>(covered) / n_test;
  r.apss = size_sum / n_test;
  return r;
}

MetricStat stat_of(const std::vector<double>& values) {
  MetricStat s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / n);
  return s;
}

SweepRow aggregate_row(std::span<const TrialReport> trials) {
  SweepRow row;
  row.alpha = trials.front().alpha;
  row.cal_fraction = trials.front().cal_fraction;
  row.kind = trials.front().kind;
  row.n_trials = static_cast<int>(trials.size());
  std::vector<double> lam, fdr, fnr, cov, size;
  for (const TrialReport& t : trials) {
    if (!t.feasible) continue;
    lam.push_back(t.lambda_hat);
    fdr.push_back(t.mean_test_fdr);
    fnr.push_back(t.mean_test_fnr);
    cov.push_back(t.ecr);
    size.push_back(t.apss);
  }
  row.n_feasible = static_cast<int>(lam.size());
  row.lambda_hat = stat_of(lam);
  row.test_fdr = stat_of(fdr);
  row.test_fnr = stat_of(fnr);
  row.ecr = stat_of(cov);
  row.apss = stat_of(size);
  return row;
}

void check_fraction(double f, const char* what) {
  if (!(f > 0.0 && f < 1.0))
    raise(ErrorCode::ConfigInvalid, std::string(what) + " must lie in (0, 1), got " + std::to_string(f));
}

}  // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_indices(std::size_t n_samples, const SplitSpec& spec, int trial) {
  check_fraction(spec.cal_fraction, "cal_fraction");
  if (trial < 0) raise(ErrorCode::ConfigInvalid, "trial index must be >= 0");
  if (n_samples < 2) raise(ErrorCode::TooFewSamples, "need at least 2 samples to split");

  // round half up
  const auto n_cal = static_cast<std::size_t>(
      std::floor(static_cast<double>(n_samples) * spec.cal_fraction + 0.5));
  if (n_cal < 1 || n_samples - n_cal < 1)
    raise(ErrorCode::TooFewSamples,
          "cal_fraction " + std::to_string(spec.cal_fraction) + " leaves an empty side of " +
              std::to_string(n_samples) + " samples");

  std::vector<std::size_t> perm(n_samples);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng::Stream stream(spec.seed, static_cast<std::uint64_t>(trial));
  rng::shuffle(perm, stream);

  std::vector<std::size_t> cal(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_cal));
  std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(n_cal), perm.end());
  std::sort(cal.begin(), cal.end());
  std::sort(test.begin(), test.end());
  return {std::move(cal), std::move(test)};
}

std::pair<std::vector<Sample>, std::vector<Sample>>
split(std::span<const Sample> samples, const SplitSpec& spec, int trial) {
  const auto [cal_idx, test_idx] = split_indices(samples.size(), spec, trial);
  std::vector<Sample> cal, test;
  cal.reserve(cal_idx.size());
  test.reserve(test_idx.size());
  for (std::size_t i : cal_idx) cal.push_back(samples[i]);
  for (std::size_t i : test_idx) test.push_back(samples[i]);
  return {std::move(cal), std::move(test)};
}

TrialReport run_trial(std::span<const Sample> cal, std::span<const Sample> test,
                      const RiskSpec& spec, const LambdaGrid& grid) {
  validate(spec);
  if (cal.empty()) raise(ErrorCode::EmptyCalibrationSet, "calibration split is empty");
  if (test.empty()) raise(ErrorCode::TooFewSamples, "test split is empty");

  DatasetCurves curves;
  curves.per_sample.reserve(cal.size() + test.size());
  for (const Sample& s : cal) curves.per_sample.push_back(sample_curves(s, grid));
  for (const Sample& s : test) curves.per_sample.push_back(sample_curves(s, grid));

  std::vector<std::size_t> cal_idx(cal.size()), test_idx(test.size());
  std::iota(cal_idx.begin(), cal_idx.end(), std::size_t{0});
  std::iota(test_idx.begin(), test_idx.end(), cal.size());
  const double fraction =
      static_cast<double>(cal.size()) / static_cast<double>(cal.size() + test.size());
  return evaluate_trial(curves, grid, cal_idx, test_idx, spec, 0, fraction);
}

double ecr(std::span<const Sample> test, double lambda_hat, double alpha, LossKind kind) {
  if (test.empty()) raise(ErrorCode::TooFewSamples, "test set is empty");
  std::int64_t covered = 0;
  for (const Sample& s : test) {
    const BinaryMask pred = prediction_set(s.prob, lambda_hat);
    const double loss =
        kind == LossKind::FDR ? fdr_loss(pred, s.truth) : fnr_loss(pred, s.truth);
    if (loss <= alpha) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(test.size());
}

double apss(std::span<const Sample> test, double lambda_hat) {
  if (test.empty()) raise(ErrorCode::TooFewSamples, "test set is empty");
  double size_sum = 0.0;
  for (const Sample& s : test) {
    const BinaryMask pred = prediction_set(s.prob, lambda_hat);
    size_sum += static_cast<double>((pred.array() != 0).count());
  }
  return size_sum / static_cast<double>(test.size());
}

SweepReport alpha_sweep(std::span<const Sample> samples, const SplitSpec& split_spec,
                        LossKind kind, const LambdaGrid& grid, std::span<const double> alphas) {
  if (alphas.empty()) raise(ErrorCode::ConfigInvalid, "alpha list is empty");
  for (double a : alphas) check_fraction(a, "alpha");
  if (split_spec.n_trials < 1) raise(ErrorCode::ConfigInvalid, "n_trials must be >= 1");

  const DatasetCurves curves = compute_curves(samples, grid);
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> splits;
  splits.reserve(static_cast<std::size_t>(split_spec.n_trials));
  for (int t = 0; t < split_spec.n_trials; ++t)
    splits.push_back(split_indices(samples.size(), split_spec, t));

  SweepReport report;
  report.kind = kind;
  for (double alpha : alphas) {
    const RiskSpec spec{alpha, 1.0, kind};
    const std::size_t first = report.trials.size();
    for (int t = 0; t < split_spec.n_trials; ++t) {
      report.trials.push_back(evaluate_trial(curves, grid, splits[t].first, splits[t].second,
                                             spec, t, split_spec.cal_fraction));
    }
    report.rows.push_back(aggregate_row(
        std::span<const TrialReport>(report.trials).subspan(first, split_spec.n_trials)));
  }
  return report;
}

SweepReport ratio_sweep(std::span<const Sample> samples, std::span<const double> ratios,
                        LossKind kind, const LambdaGrid& grid, double alpha, std::uint64_t seed) {
  if (ratios.empty()) raise(ErrorCode::ConfigInvalid, "ratio list is empty");
  for (double r : ratios) check_fraction(r, "ratio");
  check_fraction(alpha, "alpha");

  const DatasetCurves curves = compute_curves(samples, grid);
  SweepReport report;
  report.kind = kind;
  const RiskSpec spec{alpha, 1.0, kind};
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    const SplitSpec split_spec{ratios[k], 1, seed};
    const auto [cal_idx, test_idx] =
        split_indices(samples.size(), split_spec, static_cast<int>(k));
    report.trials.push_back(
        evaluate_trial(curves, grid, cal_idx, test_idx, spec, 0, ratios[k]));
    report.rows.push_back(aggregate_row(
        std::span<const TrialReport>(report.trials).subspan(report.trials.size() - 1, 1)));
  }
  return report;
}

}  // namespace segrisk
