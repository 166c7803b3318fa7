#pragma once
// Prediction sets and the two per-sample losses (false discovery rate and
// false negative rate against the ground truth), plus their curves over a
// threshold grid.

#include <segrisk/types.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string_view>

namespace segrisk {

enum class LossKind { FDR, FNR };

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view text);

// Loss values for one sample at every grid threshold, stored in grid order
// (lambda decreasing). FNR curves are non-decreasing along the stored
// order; FDR curves carry no monotonicity promise.
struct LossCurve {
  LossKind kind;
  LambdaGrid grid;
  Eigen::ArrayXd losses;
};

// Pixels whose probability is >= 1 - lambda. The comparison happens in
// double (float operands promote exactly), so results never depend on how
// the threshold would round to float.
BinaryMask prediction_set(const ProbabilityMap& prob, double lambda);

// 1 - |pred & truth| / |pred|. An empty prediction set scores 0: no
// discoveries, no false discoveries.
double fdr_loss(const BinaryMask& pred, const BinaryMask& truth);

// 1 - |pred & truth| / |truth|. An empty ground truth scores 0: nothing
// to miss.
double fnr_loss(const BinaryMask& pred, const BinaryMask& truth);

// Both loss curves plus prediction-set sizes, computed with one pass over
// the pixels per grid point.
struct SampleCurves {
  Eigen::ArrayXd fdr;
  Eigen::ArrayXd fnr;
  Eigen::ArrayXd set_size;  // |C(lambda)| in pixels
  std::int64_t truth_size;  // foreground pixel count of the ground truth
};

SampleCurves sample_curves(const Sample& sample, const LambdaGrid& grid);

LossCurve loss_curve(const Sample& sample, const LambdaGrid& grid, LossKind kind);

// Pointwise mean over samples, accumulated in input order so the result is
// reproducible bit for bit.
Eigen::ArrayXd average_loss_curve(std::span<const LossCurve> curves);

}  // namespace segrisk
