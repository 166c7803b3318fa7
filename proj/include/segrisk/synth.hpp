#pragma once
// Synthetic exchangeable (probability map, mask) pairs from a toy blob
// model: the ground truth is a random ellipse or rectangle, the "model
// output" is the class mean plus clamped Gaussian noise.

#include <segrisk/types.hpp>

#include <cstdint>
#include <string_view>
#include <vector>

namespace segrisk {

enum class BlobShape { Ellipse, Rectangle };

std::string_view to_string(BlobShape shape);
BlobShape parse_blob_shape(std::string_view text);

struct BlobSpec {
  BlobShape shape = BlobShape::Ellipse;
  double min_area_frac = 0.1;  // target blob area as a fraction of H*W
  double max_area_frac = 0.3;
};

struct SynthConfig {
  Eigen::Index height = 64;
  Eigen::Index width = 64;
  std::int64_t n_samples = 1;
  double fg_mean = 0.8;    // mean predicted probability on foreground pixels
  double bg_mean = 0.2;    // same for background; must be < fg_mean
  double noise_std = 0.0;  // per-pixel Gaussian sigma, applied before clamping to [0, 1]
  BlobSpec blob;
  std::uint64_t seed = 0;
};

void validate(const SynthConfig& config);

struct SynthDataset {
  std::vector<Sample> samples;
  SynthConfig config;
};

// Samples are i.i.d.: sample k is produced entirely from rng stream
// (seed, k), so its bytes depend neither on generation order nor on how
// many other samples are requested. Same (config, seed) => identical
// dataset. The ground-truth blob always contains at least one pixel.
SynthDataset generate(const SynthConfig& config);

}  // namespace segrisk
