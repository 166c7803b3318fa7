#include <segrisk/losses.hpp>

#include <algorithm>
#include <cctype>

namespace segrisk {

namespace {

void require_same_shape(const BinaryMask& a, const BinaryMask& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    raise(ErrorCode::ShapeMismatch,
          "mask shapes differ: " + std::to_string(a.height()) + "x" + std::to_string(a.width()) +
              " vs " + std::to_string(b.height()) + "x" + std::to_string(b.width()));
  }
}

}  // namespace

std::string_view to_string(LossKind kind) { return kind == LossKind::FDR ? "fdr" : "fnr"; }

LossKind parse_loss_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "fdr") return LossKind::FDR;
  if (lower == "fnr") return LossKind::FNR;
  raise(ErrorCode::ConfigInvalid,
        "unknown loss kind '" + std::string(text) + "' (expected fdr or fnr)");
}

BinaryMask prediction_set(const ProbabilityMap& prob, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    raise(ErrorCode::LambdaOutOfRange, "lambda " + std::to_string(lambda) + " outside [0, 1]");
  const double threshold = 1.0 - lambda;
  MaskArray mask = (prob.array().cast<double>() >= threshold).cast<std::uint8_t>();
  return BinaryMask(std::move(mask));
}

double fdr_loss(const BinaryMask& pred, const BinaryMask& truth) {
  require_same_shape(pred, truth);
  const auto in_pred = (pred.array() != 0);
  const std::int64_t n_pred = in_pred.count();
  if (n_pred == 0) return 0.0;
  const std::int64_t n_inter = (in_pred && (truth.array() != 0)).count();
  return 1.0 - static_cast<double>(n_inter) / static_cast<double>(n_pred);
}

double fnr_loss(const BinaryMask& pred, const BinaryMask& truth) {
  require_same_shape(pred, truth);
  const auto in_truth = (truth.array() != 0);
  const std::int64_t n_truth = in_truth.count();
  if (n_truth == 0) return 0.0;
  const std::int64_t n_inter = ((pred.array() != 0) && in_truth).count();
  return 1.0 - static_cast<double>(n_inter) / static_cast<double>(n_truth);
}

SampleCurves sample_curves(const Sample& sample, const LambdaGrid& grid) {
  if (sample.prob.height() != sample.truth.height() ||
      sample.prob.width() != sample.truth.width()) {
    raise(ErrorCode::ShapeMismatch, "sample '" + sample.id + "': probability/mask shape mismatch");
  }
  using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> prob =
      sample.prob.array().cast<double>();
  const BoolArray truth = (sample.truth.array() != 0);
  const std::int64_t n_truth = truth.count();

  const Eigen::Index n = grid.size();
  SampleCurves out{Eigen::ArrayXd(n), Eigen::ArrayXd(n), Eigen::ArrayXd(n), n_truth};
  for (Eigen::Index j = 0; j < n; ++j) {
    const double threshold = 1.0 - grid[j];
    const BoolArray included = (prob >= threshold);
    const std::int64_t n_pred = included.count();
    const std::int64_t n_inter = (included && truth).count();
    out.set_size[j] = static_cast<double>(n_pred);
    out.fdr[j] =
        n_pred == 0 ? 0.0 : 1.0 - static_cast<double>(n_inter) / static_cast<double>(n_pred);
    out.fnr[j] =
        n_truth == 0 ? 0.0 : 1.0 - static_cast<double>(n_inter) / static_cast<double>(n_truth);
  }
  return out;
}

LossCurve loss_curve(const Sample& sample, const LambdaGrid& grid, LossKind kind) {
  SampleCurves c = sample_curves(sample, grid);
  return LossCurve{kind, grid, kind == LossKind::FDR ? std::move(c.fdr) : std::move(c.fnr)};
}

Eigen::ArrayXd average_loss_curve(std::span<const LossCurve> curves) {
  if (curves.empty()) raise(ErrorCode::EmptyCalibrationSet, "no loss curves to average");
  const LossCurve& head = curves.front();
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(head.grid.size());
  for (const LossCurve& c : curves) {
    if (c.kind != head.kind || !(c.grid == head.grid) || c.losses.size() != head.grid.size())
      raise(ErrorCode::GridMismatch, "loss curves disagree on grid or kind");
    acc += c.losses;
  }
  return acc / static_cast<double>(curves.size());
}

}  // namespace segrisk
