#include <segrisk/synth.hpp>

#include <segrisk/calibration.hpp>

#include <doctest.h>

#include <vector>

#include "helpers.hpp"

using namespace segrisk;

namespace {

bool same_sample(const Sample& a, const Sample& b) {
  return a.id == b.id && (a.prob.array() == b.prob.array()).all() &&
         (a.truth.array() == b.truth.array()).all();
}

}  // namespace

TEST_CASE("blob shape names round-trip and reject junk") {
  CHECK(to_string(BlobShape::Ellipse) == "ellipse");
  CHECK(to_string(BlobShape::Rectangle) == "rectangle");
  CHECK(parse_blob_shape("ellipse") == BlobShape::Ellipse);
  CHECK(parse_blob_shape("Rectangle") == BlobShape::Rectangle);
  CHECK_THROWS_AS(parse_blob_shape("triangle"), Error);
}

TEST_CASE("synth config validation catches impossible settings") {
  SynthConfig ok;
  CHECK_NOTHROW(validate(ok));

  SynthConfig bad = ok;
  bad.fg_mean = 0.1;
  bad.bg_mean = 0.9;  // background brighter than foreground
  CHECK_THROWS_AS(validate(bad), Error);

  bad = ok;
  bad.n_samples = 0;
  CHECK_THROWS_AS(validate(bad), Error);

  bad = ok;
  bad.height = 0;
  CHECK_THROWS_AS(validate(bad), Error);

  bad = ok;
  bad.noise_std = -0.1;
  CHECK_THROWS_AS(validate(bad), Error);

  bad = ok;
  bad.fg_mean = 1.0;  // means must be strictly inside (0, 1)
  CHECK_THROWS_AS(validate(bad), Error);

  bad = ok;
  bad.blob.min_area_frac = 0.4;
  bad.blob.max_area_frac = 0.2;
  CHECK_THROWS_AS(validate(bad), Error);

  bad = ok;
  bad.blob.max_area_frac = 1.0;  // blob may not fill the whole image
  CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("zero noise produces exactly the class means") {
  SynthConfig config;
  config.height = 16;
  config.width = 16;
  config.n_samples = 4;
  config.noise_std = 0.0;
  config.seed = 11;
  const auto data = generate(config);
  REQUIRE(data.samples.size() == 4);
  const float fg = static_cast<float>(config.fg_mean);
  const float bg = static_cast<float>(config.bg_mean);
  for (const auto& s : data.samples) {
    REQUIRE(s.prob.height() == 16);
    REQUIRE(s.prob.width() == 16);
    std::int64_t foreground = 0;
    for (Eigen::Index r = 0; r < 16; ++r) {
      for (Eigen::Index c = 0; c < 16; ++c) {
        const bool on = s.truth.array()(r, c) != 0;
        foreground += on;
        CHECK(s.prob.array()(r, c) == (on ? fg : bg));
      }
    }
    CHECK(foreground >= 1);  // the blob never vanishes
  }
}

TEST_CASE("generation is a pure function of config and seed") {
  SynthConfig config;
  config.height = 24;
  config.width = 18;
  config.n_samples = 6;
  config.noise_std = 0.2;
  config.seed = 99;
  const auto a = generate(config);
  const auto b = generate(config);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    CHECK(same_sample(a.samples[i], b.samples[i]));

  config.seed = 100;
  const auto c = generate(config);
  bool any_difference = false;
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    any_difference = any_difference || !same_sample(a.samples[i], c.samples[i]);
  CHECK(any_difference);
}

TEST_CASE("each sample depends only on its own index, not on the batch size") {
  SynthConfig small;
  small.height = 12;
  small.width = 12;
  small.n_samples = 3;
  small.noise_std = 0.15;
  small.seed = 7;
  SynthConfig large = small;
  large.n_samples = 5;
  const auto a = generate(small);
  const auto b = generate(large);
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    CHECK(same_sample(a.samples[i], b.samples[i]));
}

TEST_CASE("sample ids are stable zero-padded indices") {
  SynthConfig config;
  config.height = 4;
  config.width = 4;
  config.n_samples = 2;
  const auto data = generate(config);
  CHECK(data.samples[0].id == "sample_00000");
  CHECK(data.samples[1].id == "sample_00001");
}

TEST_CASE("noisy outputs stay valid probabilities") {
  SynthConfig config;
  config.height = 16;
  config.width = 16;
  config.n_samples = 20;
  config.noise_std = 0.6;  // large enough that clamping must kick in
  config.seed = 3;
  for (const auto& s : generate(config).samples) CHECK_NOTHROW(validate_sample(s));
}

TEST_CASE("blob areas respect the configured range on average") {
  SynthConfig config;
  config.height = 64;
  config.width = 64;
  config.n_samples = 1000;
  config.seed = 5;
  const auto data = generate(config);
  double total_fraction = 0.0;
  for (const auto& s : data.samples) {
    const double fg = static_cast<double>((s.truth.array() == 1).count());
    total_fraction += fg / static_cast<double>(s.truth.size());
  }
  const double mean_fraction = total_fraction / static_cast<double>(data.samples.size());
  // Target area is uniform on [0.1, 0.3] of the image; rasterization and
  // boundary clamping move individual blobs a little, not the average.
  CHECK(mean_fraction > 0.08);
  CHECK(mean_fraction < 0.32);
}

TEST_CASE("rectangles work and tiny images still get a nonempty blob") {
  SynthConfig config;
  config.height = 2;
  config.width = 2;
  config.n_samples = 200;
  config.blob.shape = BlobShape::Rectangle;
  config.seed = 17;
  for (const auto& s : generate(config).samples) {
    CHECK((s.truth.array() == 1).count() >= 1);
  }
}

TEST_CASE("calibrating on zero-noise data recovers a threshold below the foreground mean") {
  SynthConfig config;
  config.height = 16;
  config.width = 16;
  config.n_samples = 32;
  config.noise_std = 0.0;
  config.seed = 21;
  const auto data = generate(config);
  std::vector<LossCurve> curves;
  const auto grid = default_lambda_grid();
  for (const auto& s : data.samples) curves.push_back(loss_curve(s, grid, LossKind::FNR));
  const auto result = select_threshold(curves, RiskSpec{0.25, 1.0, LossKind::FNR});
  REQUIRE(result.feasible);
  // Every foreground pixel sits exactly at fg_mean, so the selected
  // prediction threshold 1 - lambda cannot exceed it.
  CHECK(1.0 - result.lambda_hat <= config.fg_mean + 1e-12);
  CHECK(result.achieved_calibration_loss == 0.0);
}
