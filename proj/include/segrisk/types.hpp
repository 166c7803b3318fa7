#pragma once
// Grid types shared across the library: probability maps, binary masks,
// image samples and the candidate-threshold grid. Pixel data is stored in
// single precision; all loss arithmetic downstream runs in double.

#include <segrisk/error.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>

namespace segrisk {

using ProbArray = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MaskArray = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// H x W per-pixel foreground probabilities (raw model output).
// Content is immutable after construction; degenerate grids are rejected.
// Element range is checked by validate_sample / the file readers, not here,
// so out-of-range data coming from outside can still be inspected.
class ProbabilityMap {
 public:
  explicit ProbabilityMap(ProbArray values) : values_(std::move(values)) {
    if (values_.rows() <= 0 || values_.cols() <= 0)
      raise(ErrorCode::InvalidDimensions, "probability map needs positive height and width");
  }

  Eigen::Index height() const { return values_.rows(); }
  Eigen::Index width() const { return values_.cols(); }
  Eigen::Index size() const { return values_.size(); }
  const ProbArray& array() const { return values_; }

 private:
  ProbArray values_;
};

// H x W mask with elements in {0, 1}: ground truth or a prediction set.
class BinaryMask {
 public:
  explicit BinaryMask(MaskArray values) : values_(std::move(values)) {
    if (values_.rows() <= 0 || values_.cols() <= 0)
      raise(ErrorCode::InvalidDimensions, "mask needs positive height and width");
  }

  Eigen::Index height() const { return values_.rows(); }
  Eigen::Index width() const { return values_.cols(); }
  Eigen::Index size() const { return values_.size(); }
  const MaskArray& array() const { return values_; }

 private:
  MaskArray values_;
};

// One (probability map, ground truth) pair. The two grids must agree on
// shape; validate_sample is the gate that enforces that together with the
// element-level invariants.
struct Sample {
  std::string id;
  ProbabilityMap prob;
  BinaryMask truth;
};

// Returns normally iff every invariant holds: matching shapes, all
// probabilities inside [0, 1], mask elements in {0, 1}. Otherwise throws
// Error with ShapeMismatch / ValueOutOfRange / NonBinaryMask, naming the
// offending flat (row-major) index.
void validate_sample(const Sample& sample);

// Strictly decreasing candidate thresholds, first element 1, last 0.
class LambdaGrid {
 public:
  explicit LambdaGrid(Eigen::ArrayXd values);

  // Uniformly spaced grid from 1 down to 0 with `points` entries.
  static LambdaGrid uniform(Eigen::Index points);

  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }
  const Eigen::ArrayXd& values() const { return values_; }

 private:
  Eigen::ArrayXd values_;
};

bool operator==(const LambdaGrid& a, const LambdaGrid& b);

// The standard 101-point grid 1.00, 0.99, ..., 0.00.
LambdaGrid default_lambda_grid();

}  // namespace segrisk
