#include <segrisk/synth.hpp>

#include <segrisk/rng.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace segrisk {

std::string_view to_string(BlobShape shape) {
  return shape == BlobShape::Ellipse ? "ellipse" : "rectangle";
}

BlobShape parse_blob_shape(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "ellipse") return BlobShape::Ellipse;
  if (lower == "rectangle" || lower == "rect") return BlobShape::Rectangle;
  raise(ErrorCode::ConfigInvalid,
        "unknown blob shape '" + std::string(text) + "' (expected ellipse or rectangle)");
}

void validate(const SynthConfig& config) {
  if (config.height <= 0 || config.width <= 0)
    raise(ErrorCode::ConfigInvalid, "image dimensions must be positive");
  if (config.n_samples < 1) raise(ErrorCode::ConfigInvalid, "n_samples must be >= 1");
  if (!(config.fg_mean > 0.0 && config.fg_mean < 1.0) ||
      !(config.bg_mean > 0.0 && config.bg_mean < 1.0))
    raise(ErrorCode::ConfigInvalid, "class means must lie in (0, 1)");
  if (!(config.fg_mean > config.bg_mean))
    raise(ErrorCode::ConfigInvalid,
          "fg_mean (" + std::to_string(config.fg_mean) + ") must exceed bg_mean (" +
              std::to_string(config.bg_mean) + ")");
  if (!(config.noise_std >= 0.0 && config.noise_std <= 1.0))
    raise(ErrorCode::ConfigInvalid, "noise_std must lie in [0, 1]");
  if (!(config.blob.min_area_frac > 0.0 && config.blob.min_area_frac <= config.blob.max_area_frac &&
        config.blob.max_area_frac < 1.0))
    raise(ErrorCode::ConfigInvalid, "blob area fractions must satisfy 0 < min <= max < 1");
}

namespace {

MaskArray make_blob(const SynthConfig& cfg, rng::Stream& stream) {
  const double h = static_cast<double>(cfg.height);
  const double w = static_cast<double>(cfg.width);
  const double area = stream.uniform(cfg.blob.min_area_frac, cfg.blob.max_area_frac) * h * w;
  const double aspect = stream.uniform(0.5, 2.0);

  // half extents along x (columns) and y (rows); for the ellipse these are
  // the semi-axes
  double ax, ay;
  if (cfg.blob.shape == BlobShape::Ellipse) {
    ax = std::sqrt(area * aspect / std::numbers::pi);
    ay = std::sqrt(area / (aspect * std::numbers::pi));
  } else {
    ax = std::sqrt(area * aspect) / 2.0;
    ay = std::sqrt(area / aspect) / 2.0;
  }
  ax = std::clamp(ax, 0.5, w / 2.0);
  ay = std::clamp(ay, 0.5, h / 2.0);

  // keep the blob inside the image when it fits; one draw per axis always
  const double cx_lo = std::min(ax, (w - 1.0) / 2.0);
  const double cx_hi = std::max(w - 1.0 - ax, cx_lo);
  const double cy_lo = std::min(ay, (h - 1.0) / 2.0);
  const double cy_hi = std::max(h - 1.0 - ay, cy_lo);
  const double cx = stream.uniform(cx_lo, cx_hi);
  const double cy = stream.uniform(cy_lo, cy_hi);

  MaskArray mask = MaskArray::Zero(cfg.height, cfg.width);
  for (Eigen::Index r = 0; r < cfg.height; ++r) {
    for (Eigen::Index c = 0; c < cfg.width; ++c) {
      const double dx = (static_cast<double>(c) - cx);
      const double dy = (static_cast<double>(r) - cy);
      bool inside;
      if (cfg.blob.shape == BlobShape::Ellipse)
        inside = (dx / ax) * (dx / ax) + (dy / ay) * (dy / ay) <= 1.0;
      else
        inside = std::abs(dx) <= ax && std::abs(dy) <= ay;
      if (inside) mask(r, c) = 1;
    }
  }
  if ((mask != 0).count() == 0) {
    // tiny blob rasterized to nothing: pin the pixel nearest the center
    const auto rc = std::clamp<Eigen::Index>(std::llround(cy), 0, cfg.height - 1);
    const auto cc = std::clamp<Eigen::Index>(std::llround(cx), 0, cfg.width - 1);
    mask(rc, cc) = 1;
  }
  return mask;
}

}  // namespace

SynthDataset generate(const SynthConfig& config) {
  validate(config);
  SynthDataset out;
  out.config = config;
  out.samples.reserve(static_cast<std::size_t>(config.n_samples));

  for (std::int64_t k = 0; k < config.n_samples; ++k) {
    rng::Stream stream(config.seed, static_cast<std::uint64_t>(k));
    MaskArray truth = make_blob(config, stream);

    ProbArray prob(config.height, config.width);
    // fixed row-major pixel order so the draw sequence is pinned down
    for (Eigen::Index r = 0; r < config.height; ++r) {
      for (Eigen::Index c = 0; c < config.width; ++c) {
        double v = truth(r, c) != 0 ? config.fg_mean : config.bg_mean;
        if (config.noise_std > 0.0) v = std::clamp(v + config.noise_std * stream.normal(), 0.0, 1.0);
        prob(r, c) = static_cast<float>(v);
      }
    }

    char id[32];
    std::snprintf(id, sizeof id, "sample_%05lld", static_cast<long long>(k));
    out.samples.push_back(Sample{id, ProbabilityMap(std::move(prob)), BinaryMask(std::move(truth))});
  }
  return out;
}

}  // namespace segrisk
