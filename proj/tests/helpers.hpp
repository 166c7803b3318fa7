#pragma once
// Shared test utilities: literal builders for tiny grids and randomized
// sample generators.

#include <segrisk/rng.hpp>
#include <segrisk/types.hpp>

#include <string>
#include <utility>
#include <vector>

namespace th {

inline segrisk::ProbArray parr(const std::vector<std::vector<double>>& rows) {
  segrisk::ProbArray a(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      a(r, c) = static_cast<float>(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
  return a;
}

inline segrisk::MaskArray marr(const std::vector<std::vector<int>>& rows) {
  segrisk::MaskArray a(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      a(r, c) = static_cast<std::uint8_t>(
          rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
  return a;
}

inline segrisk::Sample make_sample(std::string id, const std::vector<std::vector<double>>& prob,
                                   const std::vector<std::vector<int>>& mask) {
  return segrisk::Sample{std::move(id), segrisk::ProbabilityMap(parr(prob)),
                         segrisk::BinaryMask(marr(mask))};
}

inline segrisk::LambdaGrid grid_of(const std::vector<double>& lambdas) {
  Eigen::ArrayXd v(static_cast<Eigen::Index>(lambdas.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = lambdas[static_cast<std::size_t>(i)];
  return segrisk::LambdaGrid(std::move(v));
}

// Random sample with probabilities that include exact 0s and 1s (the
// boundary cases thresholding cares about) and a mask that is sometimes
// entirely empty.
inline segrisk::Sample random_sample(segrisk::rng::Stream& stream, Eigen::Index max_h,
                                     Eigen::Index max_w, const std::string& id = "random") {
  const Eigen::Index h = 1 + static_cast<Eigen::Index>(stream.below(static_cast<std::uint64_t>(max_h)));
  const Eigen::Index w = 1 + static_cast<Eigen::Index>(stream.below(static_cast<std::uint64_t>(max_w)));
  segrisk::ProbArray p(h, w);
  segrisk::MaskArray m(h, w);
  const bool empty_truth = stream.below(10) == 0;
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      const double pick = stream.uniform01();
      if (pick < 0.1)
        p(r, c) = 0.0f;
      else if (pick < 0.2)
        p(r, c) = 1.0f;
      else
        p(r, c) = static_cast<float>(stream.uniform01());
      m(r, c) = empty_truth ? 0 : static_cast<std::uint8_t>(stream.below(2));
    }
  }
  return segrisk::Sample{id, segrisk::ProbabilityMap(std::move(p)),
                         segrisk::BinaryMask(std::move(m))};
}

}  // namespace th
