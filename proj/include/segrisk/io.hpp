#pragma once
// On-disk formats and report writers.
//
//   PFG1  "PFG1" | u32le height | u32le width | h*w f32le, row-major
//   MSK1  "MSK1" | u32le height | u32le width | h*w bytes, each 0 or 1
//
// Writers stage into "<path>.tmp" and rename, so a crash never leaves a
// half-written file under the final name. Readers validate magic, header
// dimensions, exact payload size and element ranges before returning, and
// report every failure as a typed Error.

#include <segrisk/experiments.hpp>
#include <segrisk/types.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace segrisk {

void write_prob(const std::filesystem::path& path, const ProbabilityMap& map);
ProbabilityMap read_prob(const std::filesystem::path& path);

void write_mask(const std::filesystem::path& path, const BinaryMask& mask);
BinaryMask read_mask(const std::filesystem::path& path);

// Import path for masks produced by external tools: 8-bit binary PGM (P5),
// mapping 0 -> 0 and any nonzero value -> 1.
BinaryMask read_pgm_mask(const std::filesystem::path& path);

struct ManifestEntry {
  std::string id;
  std::string prob_path;  // relative to the manifest's directory
  std::string mask_path;
  std::int64_t height = 0;
  std::int64_t width = 0;
};

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

// Loads and validates every sample the manifest names. Declared dimensions
// must match the file headers, ids must be unique, and each sample must
// pass validate_sample. Throws on the first violation (naming the sample),
// so callers get either the whole dataset or nothing.
std::vector<Sample> load_manifest(const std::filesystem::path& path);

inline constexpr int kReportSchemaVersion = 1;

// Run-level metadata stamped onto every report row. No wall-clock data on
// purpose: identical flags must reproduce identical report bytes.
struct RunMeta {
  std::string config_hash;  // fnv1a-64 hex of the canonical flag string
  std::uint64_t seed = 0;
};

struct ReportRow {
  int trial = 0;
  double alpha = 0.0;
  LossKind kind = LossKind::FNR;
  double ratio = 0.0;  // calibration fraction of the split
  double lambda_hat = 1.0;
  bool feasible = false;
  double mean_test_fdr = 0.0;
  double mean_test_fnr = 0.0;
  double ecr = 0.0;
  double apss = 0.0;
  std::int64_t n_cal = 0;
  std::int64_t n_test = 0;
  int schema_version = kReportSchemaVersion;
  std::string config_hash;
  std::uint64_t seed = 0;
};

ReportRow make_report_row(const TrialReport& trial, const RunMeta& meta);

enum class ReportFormat { Csv, Json };

// Stable column order; JSON is an array of objects with the same keys.
// Floating-point values carry 17 significant digits, so reading them back
// reproduces the doubles exactly.
extern const char* const kReportCsvHeader;

void write_report(std::span<const ReportRow> rows, const std::filesystem::path& path,
                  ReportFormat format);

// FNV-1a 64-bit, as 16 lowercase hex chars.
std::string fnv1a_hex(std::string_view text);

// "%.17g" — round-trip-exact decimal form of a double.
std::string format_g17(double value);

}  // namespace segrisk
