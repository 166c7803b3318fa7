#include <segrisk/types.hpp>

namespace segrisk {

void validate_sample(const Sample& sample) {
  if (sample.prob.height() != sample.truth.height() ||
      sample.prob.width() != sample.truth.width()) {
    raise(ErrorCode::ShapeMismatch,
          "sample '" + sample.id + "': probability map is " +
              std::to_string(sample.prob.height()) + "x" + std::to_string(sample.prob.width()) +
              " but mask is " + std::to_string(sample.truth.height()) + "x" +
              std::to_string(sample.truth.width()));
  }
  const float* p = sample.prob.array().data();
  for (Eigen::Index i = 0; i < sample.prob.size(); ++i) {
    if (!(p[i] >= 0.0f && p[i] <= 1.0f)) {  // also rejects NaN
      raise(ErrorCode::ValueOutOfRange,
            "sample '" + sample.id + "': probability " + std::to_string(p[i]) +
                " at flat index " + std::to_string(i));
    }
  }
  const std::uint8_t* m = sample.truth.array().data();
  for (Eigen::Index i = 0; i < sample.truth.size(); ++i) {
    if (m[i] > 1) {
      raise(ErrorCode::NonBinaryMask,
            "sample '" + sample.id + "': mask value " + std::to_string(int(m[i])) +
                " at flat index " + std::to_string(i));
    }
  }
}

LambdaGrid::LambdaGrid(Eigen::ArrayXd values) : values_(std::move(values)) {
  if (values_.size() < 2) raise(ErrorCode::InvalidGrid, "lambda grid needs at least 2 points");
  if (!(values_[0] == 1.0)) raise(ErrorCode::InvalidGrid, "lambda grid must start at 1.0");
  if (!(values_[values_.size() - 1] == 0.0))
    raise(ErrorCode::InvalidGrid, "lambda grid must end at 0.0");
  for (Eigen::Index i = 0; i + 1 < values_.size(); ++i) {
    if (!(values_[i] > values_[i + 1]))  // also rejects NaN entries
      raise(ErrorCode::InvalidGrid,
            "lambda grid must be strictly decreasing (violated at index " + std::to_string(i) +
                ")");
  }
}

LambdaGrid LambdaGrid::uniform(Eigen::Index points) {
  if (points < 2) raise(ErrorCode::InvalidGrid, "lambda grid needs at least 2 points");
  Eigen::ArrayXd v(points);
  // (points-1-j) / (points-1) hits both endpoints exactly and keeps the
  // step constant to the last ulp.
  for (Eigen::Index j = 0; j < points; ++j)
    v[j] = static_cast<double>(points - 1 - j) / static_cast<double>(points - 1);
  return LambdaGrid(std::move(v));
}

bool operator==(const LambdaGrid& a, const LambdaGrid& b) {
  return a.values().size() == b.values().size() && (a.values() == b.values()).all();
}

LambdaGrid default_lambda_grid() { return LambdaGrid::uniform(101); }

}  // namespace segrisk
