#include <segrisk/calibration.hpp>

namespace segrisk {

void validate(const RiskSpec& spec) {
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0))
    raise(ErrorCode::ConfigInvalid, "alpha must lie in (0, 1), got " + std::to_string(spec.alpha));
  if (!(spec.bound_b >= spec.alpha))
    raise(ErrorCode::ConfigInvalid, "loss bound B (" + std::to_string(spec.bound_b) +
                                        ") must be >= alpha (" + std::to_string(spec.alpha) + ")");
}

double selection_rhs(const RiskSpec& spec, std::int64_t n_cal) {
  return spec.alpha - (spec.bound_b - spec.alpha) / static_cast<double>(n_cal);
}

double risk_upper_bound(double mean_loss, std::int64_t n_cal, double bound_b) {
  const double n = static_cast<double>(n_cal);
  return (n * mean_loss + bound_b) / (n + 1.0);
}

SelectionOutcome select_threshold_index(const Eigen::ArrayXd& average_losses,
                                        const RiskSpec& spec, std::int64_t n_cal) {
  validate(spec);
  if (n_cal <= 0) raise(ErrorCode::EmptyCalibrationSet, "calibration set is empty");
  const double rhs = selection_rhs(spec, n_cal);
  SelectionOutcome out;
  for (Eigen::Index j = 0; j < average_losses.size(); ++j) {
    // grid order is decreasing, so the last qualifying index holds the
    // smallest qualifying lambda
    if (average_losses[j] <= rhs) {
      out.feasible = true;
      out.index = j;
    }
  }
  return out;
}

CalibrationResult select_threshold(std::span<const LossCurve> curves, const RiskSpec& spec) {
  validate(spec);
  if (curves.empty()) raise(ErrorCode::EmptyCalibrationSet, "calibration set is empty");
  for (const LossCurve& c : curves) {
    if (c.kind != spec.kind)
      raise(ErrorCode::GridMismatch, "calibration curve kind differs from the requested kind");
  }
  const Eigen::ArrayXd avg = average_loss_curve(curves);
  const std::int64_t n_cal = static_cast<std::int64_t>(curves.size());
  const SelectionOutcome sel = select_threshold_index(avg, spec, n_cal);

  CalibrationResult result;
  result.spec = spec;
  result.n_cal = n_cal;
  result.feasible = sel.feasible;
  result.lambda_hat = curves.front().grid[sel.index];
  result.achieved_calibration_loss = avg[sel.index];
  return result;
}

double certified_bound(const CalibrationResult& result) {
  if (!result.feasible)
    raise(ErrorCode::NotFeasible, "calibration was infeasible; no bound is certified");
  return risk_upper_bound(result.achieved_calibration_loss, result.n_cal, result.spec.bound_b);
}

}  // namespace segrisk
