#pragma once
// Threshold selection. Given per-sample loss curves on a calibration set,
// pick the smallest grid lambda whose average loss satisfies
//
//   L_n(lambda) <= alpha - (B - alpha) / n
//
// which certifies (n L_n(lambda) + B) / (n + 1) <= alpha for the expected
// loss of an exchangeable test sample. B is the a-priori upper bound on a
// single loss (1 for both rates here).

#include <segrisk/losses.hpp>

#include <cstdint>
#include <span>

namespace segrisk {

struct RiskSpec {
  double alpha = 0.1;    // target risk level, in (0, 1)
  double bound_b = 1.0;  // a-priori bound on one loss; must be >= alpha
  LossKind kind = LossKind::FNR;
};

void validate(const RiskSpec& spec);

// Right-hand side of the selection condition; with B = 1 this equals
// (alpha (n + 1) - 1) / n. May be negative, in which case nothing
// qualifies and calibration is infeasible.
double selection_rhs(const RiskSpec& spec, std::int64_t n_cal);

// (n * mean_loss + b) / (n + 1)
double risk_upper_bound(double mean_loss, std::int64_t n_cal, double bound_b);

struct CalibrationResult {
  double lambda_hat = 1.0;  // member of the grid; reported as 1.0 when infeasible (uncertified)
  RiskSpec spec;
  std::int64_t n_cal = 0;
  double achieved_calibration_loss = 0.0;  // L_n at the reported lambda
  bool feasible = false;
};

struct SelectionOutcome {
  bool feasible = false;
  Eigen::Index index = 0;  // grid index of the selected lambda; 0 when infeasible
};

// Scans the full grid; no monotonicity is assumed, so non-monotone FDR
// curves get the same treatment as monotone FNR curves. Among qualifying
// grid points the smallest lambda (largest index) wins.
SelectionOutcome select_threshold_index(const Eigen::ArrayXd& average_losses,
                                        const RiskSpec& spec, std::int64_t n_cal);

CalibrationResult select_threshold(std::span<const LossCurve> curves, const RiskSpec& spec);

// Certified upper bound on the expected test loss at the selected
// threshold. Requires a feasible result.
double certified_bound(const CalibrationResult& result);

}  // namespace segrisk
