#include <segrisk/io.hpp>

#include <json.hpp>

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <unordered_set>

namespace segrisk {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr char kProbMagic[4] = {'P', 'F', 'G', '1'};
constexpr char kMaskMagic[4] = {'M', 'S', 'K', '1'};
constexpr std::size_t kHeaderBytes = 12;

void put_u32le(std::string& buf, std::uint32_t v) {
  buf.push_back(static_cast<char>(v & 0xFF));
  buf.push_back(static_cast<char>((v >> 8) & 0xFF));
  buf.push_back(static_cast<char>((v >> 16) & 0xFF));
  buf.push_back(static_cast<char>((v >> 24) & 0xFF));
}

std::uint32_t get_u32le(const std::string& buf, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(buf[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(buf[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(buf[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(buf[at + 3])) << 24;
}

std::string read_file(const fs::path& path) {
  if (!fs::exists(path)) raise(ErrorCode::MissingFile, "'" + path.string() + "' does not exist");
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) raise(ErrorCode::IoFailure, "read failed on '" + path.string() + "'");
  return bytes;
}

// stage-then-rename so the final name never holds a partial file
void atomic_write(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::IoFailure, "cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) raise(ErrorCode::IoFailure, "write failed on '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec)
    raise(ErrorCode::IoFailure,
          "rename '" + tmp.string() + "' -> '" + path.string() + "': " + ec.message());
}

// shared header checks for both binary formats; returns (height, width)
std::pair<std::uint32_t, std::uint32_t> parse_grid_header(const std::string& bytes,
                                                          const char magic[4],
                                                          std::size_t bytes_per_element,
                                                          const fs::path& path) {
  if (bytes.size() < kHeaderBytes)
    raise(ErrorCode::TruncatedFile, "'" + path.string() + "' is shorter than the 12-byte header");
  if (std::memcmp(bytes.data(), magic, 4) != 0)
    raise(ErrorCode::BadMagic, "'" + path.string() + "' does not start with " +
                                   std::string(magic, 4));
  const std::uint32_t h = get_u32le(bytes, 4);
  const std::uint32_t w = get_u32le(bytes, 8);
  if (h == 0 || w == 0)
    raise(ErrorCode::InvalidDimensions, "'" + path.string() + "' declares a zero dimension");
  // overflow-safe size check before any allocation happens
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max();
  if (static_cast<std::uint64_t>(h) > (limit - kHeaderBytes) / bytes_per_element / w)
    raise(ErrorCode::TruncatedFile, "'" + path.string() + "' declares an implausible size");
  const std::uint64_t expected =
      kHeaderBytes + bytes_per_element * static_cast<std::uint64_t>(h) * w;
  if (bytes.size() != expected)
    raise(ErrorCode::TruncatedFile, "'" + path.string() + "' holds " +
                                        std::to_string(bytes.size()) + " bytes, expected " +
                                        std::to_string(expected));
  return {h, w};
}

}  // namespace

void write_prob(const fs::path& path, const ProbabilityMap& map) {
  std::string buf;
  buf.reserve(kHeaderBytes + 4 * static_cast<std::size_t>(map.size()));
  buf.append(kProbMagic, 4);
  put_u32le(buf, static_cast<std::uint32_t>(map.height()));
  put_u32le(buf, static_cast<std::uint32_t>(map.width()));
  const float* data = map.array().data();
  for (Eigen::Index i = 0; i < map.size(); ++i)
    put_u32le(buf, std::bit_cast<std::uint32_t>(data[i]));
  atomic_write(path, buf);
}

ProbabilityMap read_prob(const fs::path& path) {
  const std::string bytes = read_file(path);
  const auto [h, w] = parse_grid_header(bytes, kProbMagic, 4, path);
  ProbArray arr(h, w);
  float* out = arr.data();
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(h) * w; ++i) {
    const float v = std::bit_cast<float>(get_u32le(bytes, kHeaderBytes + 4 * i));
    if (!(v >= 0.0f && v <= 1.0f))  // NaN fails too
      raise(ErrorCode::ValueOutOfRange, "'" + path.string() + "': probability " +
                                            std::to_string(v) + " at flat index " +
                                            std::to_string(i));
    out[i] = v;
  }
  return ProbabilityMap(std::move(arr));
}

void write_mask(const fs::path& path, const BinaryMask& mask) {
  const std::uint8_t* data = mask.array().data();
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    if (data[i] > 1)
      raise(ErrorCode::NonBinaryMask,
            "mask value " + std::to_string(int(data[i])) + " at flat index " + std::to_string(i));
  }
  std::string buf;
  buf.reserve(kHeaderBytes + static_cast<std::size_t>(mask.size()));
  buf.append(kMaskMagic, 4);
  put_u32le(buf, static_cast<std::uint32_t>(mask.height()));
  put_u32le(buf, static_cast<std::uint32_t>(mask.width()));
  buf.append(reinterpret_cast<const char*>(data), static_cast<std::size_t>(mask.size()));
  atomic_write(path, buf);
}

BinaryMask read_mask(const fs::path& path) {
  const std::string bytes = read_file(path);
  const auto [h, w] = parse_grid_header(bytes, kMaskMagic, 1, path);
  MaskArray arr(h, w);
  std::uint8_t* out = arr.data();
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(h) * w; ++i) {
    const auto v = static_cast<std::uint8_t>(bytes[kHeaderBytes + i]);
    if (v > 1)
      raise(ErrorCode::NonBinaryMask, "'" + path.string() + "': value " + std::to_string(int(v)) +
                                          " at flat index " + std::to_string(i));
    out[i] = v;
  }
  return BinaryMask(std::move(arr));
}

BinaryMask read_pgm_mask(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    raise(ErrorCode::BadMagic, "'" + path.string() + "' is not a binary PGM (P5) file");

  // header tokens: width, height, maxval; '#' starts a comment to EOL
  std::size_t pos = 2;
  auto next_int = [&](const char* what) -> long {
    while (pos < bytes.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    long value = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > std::numeric_limits<std::int32_t>::max())
        raise(ErrorCode::TruncatedFile, "'" + path.string() + "': oversized " + what);
      ++pos;
      any = true;
    }
    if (!any)
      raise(ErrorCode::TruncatedFile, "'" + path.string() + "': missing " + std::string(what));
    return value;
  };

  const long w = next_int("width");
  const long h = next_int("height");
  const long maxval = next_int("maxval");
  if (w <= 0 || h <= 0)
    raise(ErrorCode::InvalidDimensions, "'" + path.string() + "' declares a zero dimension");
  if (maxval < 1 || maxval > 255)
    raise(ErrorCode::ValueOutOfRange,
          "'" + path.string() + "': only 8-bit PGM supported, maxval " + std::to_string(maxval));
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    raise(ErrorCode::TruncatedFile, "'" + path.string() + "': missing header terminator");
  ++pos;  // exactly one whitespace byte separates header and payload

  const std::uint64_t n = static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(h);
  if (bytes.size() - pos != n)
    raise(ErrorCode::TruncatedFile, "'" + path.string() + "': payload holds " +
                                        std::to_string(bytes.size() - pos) + " bytes, expected " +
                                        std::to_string(n));
  MaskArray arr(h, w);
  std::uint8_t* out = arr.data();
  for (std::uint64_t i = 0; i < n; ++i)
    out[i] = bytes[pos + i] == 0 ? std::uint8_t{0} : std::uint8_t{1};
  return BinaryMask(std::move(arr));
}

void write_manifest(const fs::path& path, std::span<const ManifestEntry> entries) {
  json samples = json::array();
  for (const ManifestEntry& e : entries) {
    samples.push_back(json{{"id", e.id},
                           {"prob_path", e.prob_path},
                           {"mask_path", e.mask_path},
                           {"height", e.height},
                           {"width", e.width}});
  }
  const json doc{{"version", 1}, {"samples", samples}};
  atomic_write(path, doc.dump(2) + "\n");
}

std::vector<Sample> load_manifest(const fs::path& path) {
  if (!fs::exists(path))
    raise(ErrorCode::MissingFile, "manifest '" + path.string() + "' does not exist");
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    raise(ErrorCode::ManifestParse, "manifest '" + path.string() + "': " + e.what());
  }

  std::vector<Sample> samples;
  try {
    if (doc.at("version").get<int>() != 1)
      raise(ErrorCode::ManifestParse, "manifest '" + path.string() + "': unsupported version");
    const fs::path base = path.parent_path();
    std::unordered_set<std::string> seen;
    for (const json& s : doc.at("samples")) {
      const auto id = s.at("id").get<std::string>();
      if (!seen.insert(id).second)
        raise(ErrorCode::ManifestParse, "manifest '" + path.string() + "': duplicate id '" + id + "'");
      const auto declared_h = s.at("height").get<std::int64_t>();
      const auto declared_w = s.at("width").get<std::int64_t>();
      const fs::path prob_path = base / s.at("prob_path").get<std::string>();
      const fs::path mask_path = base / s.at("mask_path").get<std::string>();
      if (!fs::exists(prob_path))
        raise(ErrorCode::MissingFile, "sample '" + id + "': missing '" + prob_path.string() + "'");
      if (!fs::exists(mask_path))
        raise(ErrorCode::MissingFile, "sample '" + id + "': missing '" + mask_path.string() + "'");
      ProbabilityMap prob = read_prob(prob_path);
      if (prob.height() != declared_h || prob.width() != declared_w)
        raise(ErrorCode::DimMismatch,
              "sample '" + id + "': manifest declares " + std::to_string(declared_h) + "x" +
                  std::to_string(declared_w) + " but '" + prob_path.string() + "' is " +
                  std::to_string(prob.height()) + "x" + std::to_string(prob.width()));
      BinaryMask mask = read_mask(mask_path);
      if (mask.height() != declared_h || mask.width() != declared_w)
        raise(ErrorCode::DimMismatch,
              "sample '" + id + "': manifest declares " + std::to_string(declared_h) + "x" +
                  std::to_string(declared_w) + " but '" + mask_path.string() + "' is " +
                  std::to_string(mask.height()) + "x" + std::to_string(mask.width()));
      Sample sample{id, std::move(prob), std::move(mask)};
      validate_sample(sample);
      samples.push_back(std::move(sample));
    }
  } catch (const json::exception& e) {
    raise(ErrorCode::ManifestParse, "manifest '" + path.string() + "': " + e.what());
  }
  return samples;
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

std::string format_g17(double value) {
  char out[64];
  std::snprintf(out, sizeof out, "%.17g", value);
  return out;
}

ReportRow make_report_row(const TrialReport& trial, const RunMeta& meta) {
  ReportRow row;
  row.trial = trial.trial_index;
  row.alpha = trial.alpha;
  row.kind = trial.kind;
  row.ratio = trial.cal_fraction;
  row.lambda_hat = trial.lambda_hat;
  row.feasible = trial.feasible;
  row.mean_test_fdr = trial.mean_test_fdr;
  row.mean_test_fnr = trial.mean_test_fnr;
  row.ecr = trial.ecr;
  row.apss = trial.apss;
  row.n_cal = trial.n_cal;
  row.n_test = trial.n_test;
  row.schema_version = kReportSchemaVersion;
  row.config_hash = meta.config_hash;
  row.seed = meta.seed;
  return row;
}

const char* const kReportCsvHeader =
    "trial,alpha,kind,ratio,lambda_hat,feasible,mean_test_fdr,mean_test_fnr,ecr,apss,"
    "n_cal,n_test,schema_version,config_hash,seed";

namespace {

void require_writable_rows(std::span<const ReportRow> rows) {
  if (rows.empty()) raise(ErrorCode::IoFailure, "refusing to write an empty report");
  for (const ReportRow& r : rows) {
    const double nums[] = {r.alpha, r.ratio, r.lambda_hat, r.mean_test_fdr,
                           r.mean_test_fnr, r.ecr, r.apss};
    for (double v : nums)
      if (!std::isfinite(v))
        raise(ErrorCode::IoFailure, "report row has a non-finite numeric field");
  }
}

std::string report_csv(std::span<const ReportRow> rows) {
  std::string out = kReportCsvHeader;
  out += '\n';
  for (const ReportRow& r : rows) {
    out += std::to_string(r.trial);
    out += ',';
    out += format_g17(r.alpha);
    out += ',';
    out += to_string(r.kind);
    out += ',';
    out += format_g17(r.ratio);
    out += ',';
    out += format_g17(r.lambda_hat);
    out += ',';
    out += r.feasible ? '1' : '0';
    out += ',';
    out += format_g17(r.mean_test_fdr);
    out += ',';
    out += format_g17(r.mean_test_fnr);
    out += ',';
    out += format_g17(r.ecr);
    out += ',';
    out += format_g17(r.apss);
    out += ',';
    out += std::to_string(r.n_cal);
    out += ',';
    out += std::to_string(r.n_test);
    out += ',';
    out += std::to_string(r.schema_version);
    out += ',';
    out += r.config_hash;
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

std::string report_json(std::span<const ReportRow> rows) {
  // hand-rolled so numbers keep the exact 17-significant-digit form the
  // CSV uses and the key order matches the CSV columns
  std::string out = "[\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ReportRow& r = rows[i];
    out += "  {\"trial\": " + std::to_string(r.trial);
    out += ", \"alpha\": " + format_g17(r.alpha);
    out += ", \"kind\": \"" + std::string(to_string(r.kind)) + "\"";
    out += ", \"ratio\": " + format_g17(r.ratio);
    out += ", \"lambda_hat\": " + format_g17(r.lambda_hat);
    out += std::string(", \"feasible\": ") + (r.feasible ? "true" : "false");
    out += ", \"mean_test_fdr\": " + format_g17(r.mean_test_fdr);
    out += ", \"mean_test_fnr\": " + format_g17(r.mean_test_fnr);
    out += ", \"ecr\": " + format_g17(r.ecr);
    out += ", \"apss\": " + format_g17(r.apss);
    out += ", \"n_cal\": " + std::to_string(r.n_cal);
    out += ", \"n_test\": " + std::to_string(r.n_test);
    out += ", \"schema_version\": " + std::to_string(r.schema_version);
    out += ", \"config_hash\": \"" + r.config_hash + "\"";
    out += ", \"seed\": " + std::to_string(r.seed);
    out += i + 1 < rows.size() ? "},\n" : "}\n";
  }
  out += "]\n";
  return out;
}

}  // namespace

void write_report(std::span<const ReportRow> rows, const fs::path& path, ReportFormat format) {
  require_writable_rows(rows);
  atomic_write(path, format == ReportFormat::Csv ? report_csv(rows) : report_json(rows));
}

}  // namespace segrisk
