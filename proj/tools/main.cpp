// segrisk command line: synthetic data generation, threshold calibration,
// risk experiments and loss-curve dumps.
//
// Exit codes: 0 success, 2 usage error, 3 validation/config error,
// 4 io/format error, 5 calibration infeasible.

#include <segrisk/calibration.hpp>
#include <segrisk/experiments.hpp>
#include <segrisk/io.hpp>
#include <segrisk/losses.hpp>
#include <segrisk/synth.hpp>
#include <segrisk/types.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace segrisk;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitIo = 4;
constexpr int kExitInfeasible = 5;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic:
    case ErrorCode::TruncatedFile:
    case ErrorCode::ManifestParse:
    case ErrorCode::MissingFile:
    case ErrorCode::DimMismatch:
    case ErrorCode::IoFailure:
      return kExitIo;
    case ErrorCode::NotFeasible:
      return kExitInfeasible;
    default:
      return kExitValidation;
  }
}

struct GlobalOpts {
  std::uint64_t seed = 42;
  std::string out = "out";
  int grid_points = 101;
  bool quiet = false;
};

void say(const GlobalOpts& g, const std::string& line) {
  if (!g.quiet) std::cout << line << "\n";
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::IoFailure, "cannot open '" + tmp.string() + "' for writing");
    out << text;
    if (!out) raise(ErrorCode::IoFailure, "write failed on '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) raise(ErrorCode::IoFailure, "rename to '" + path.string() + "': " + ec.message());
}

double round9(double v) { return std::round(v * 1e9) / 1e9; }

double parse_double(const std::string& text, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    raise(ErrorCode::ConfigInvalid, std::string(what) + ": cannot parse '" + text + "'");
  }
}

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = text.find(sep, start);
    if (at == std::string::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, at - start));
    start = at + 1;
  }
}

// "start:stop:step" (inclusive of both ends within 1e-9) or a
// comma-separated list of values
std::vector<double> parse_alphas(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split_on(text, ':');
    if (parts.size() != 3)
      raise(ErrorCode::ConfigInvalid, "alpha range must look like start:stop:step, got '" + text + "'");
    const double start = parse_double(parts[0], "alpha start");
    const double stop = parse_double(parts[1], "alpha stop");
    const double step = parse_double(parts[2], "alpha step");
    if (!(step > 0.0)) raise(ErrorCode::ConfigInvalid, "alpha step must be positive");
    if (stop < start - 1e-9) raise(ErrorCode::ConfigInvalid, "alpha stop must be >= start");
    for (double x = start; x <= stop + 1e-9; x += step) out.push_back(round9(x));
  } else {
    for (const std::string& tok : split_on(text, ','))
      out.push_back(round9(parse_double(tok, "alpha")));
  }
  for (double a : out)
    if (!(a > 0.0 && a < 1.0))
      raise(ErrorCode::ConfigInvalid, "alpha " + std::to_string(a) + " outside (0, 1)");
  return out;
}

// "9:1,8:2,..." (calibration:test weights) or bare calibration fractions
std::vector<double> parse_ratios(const std::string& text) {
  std::vector<double> out;
  for (const std::string& tok : split_on(text, ',')) {
    double frac;
    if (tok.find(':') != std::string::npos) {
      const auto parts = split_on(tok, ':');
      if (parts.size() != 2)
        raise(ErrorCode::ConfigInvalid, "ratio must look like cal:test, got '" + tok + "'");
      const double a = parse_double(parts[0], "ratio");
      const double b = parse_double(parts[1], "ratio");
      if (!(a > 0.0 && b > 0.0)) raise(ErrorCode::ConfigInvalid, "ratio parts must be positive");
      frac = a / (a + b);
    } else {
      frac = parse_double(tok, "ratio");
    }
    out.push_back(round9(frac));
  }
  for (double r : out)
    if (!(r > 0.0 && r < 1.0))
      raise(ErrorCode::ConfigInvalid, "ratio " + std::to_string(r) + " outside (0, 1)");
  return out;
}

std::string join_g17(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_g17(values[i]);
  }
  return out;
}

std::vector<ReportRow> to_rows(const SweepReport& report, const RunMeta& meta) {
  std::vector<ReportRow> rows;
  rows.reserve(report.trials.size());
  for (const TrialReport& t : report.trials) rows.push_back(make_report_row(t, meta));
  return rows;
}

void write_plot_csv(const SweepReport& report, const fs::path& path) {
  std::string csv = "alpha,mean_loss,std_loss,companion_mean,companion_std\n";
  for (const SweepRow& row : report.rows) {
    const MetricStat& own = report.kind == LossKind::FNR ? row.test_fnr : row.test_fdr;
    const MetricStat& other = report.kind == LossKind::FNR ? row.test_fdr : row.test_fnr;
    csv += format_g17(row.alpha);
    csv += ',';
    csv += format_g17(own.mean);
    csv += ',';
    csv += format_g17(own.stddev);
    csv += ',';
    csv += format_g17(other.mean);
    csv += ',';
    csv += format_g17(other.stddev);
    csv += '\n';
  }
  write_text_atomic(path, csv);
}

int cmd_synth(const GlobalOpts& g, const SynthConfig& config) {
  const SynthDataset data = generate(config);
  fs::create_directories(g.out);

  std::vector<ManifestEntry> entries;
  entries.reserve(data.samples.size());
  for (std::size_t k = 0; k < data.samples.size(); ++k) {
    const Sample& s = data.samples[k];
    char prob_name[32], mask_name[32];
    std::snprintf(prob_name, sizeof prob_name, "prob_%05zu.pfg1", k);
    std::snprintf(mask_name, sizeof mask_name, "mask_%05zu.msk1", k);
    write_prob(fs::path(g.out) / prob_name, s.prob);
    write_mask(fs::path(g.out) / mask_name, s.truth);
    entries.push_back(ManifestEntry{s.id, prob_name, mask_name,
                                    static_cast<std::int64_t>(s.prob.height()),
                                    static_cast<std::int64_t>(s.prob.width())});
  }
  const fs::path manifest = fs::path(g.out) / "manifest.json";
  write_manifest(manifest, entries);
  say(g, manifest.string());
  return kExitOk;
}

int cmd_calibrate(const GlobalOpts& g, const std::string& manifest, double alpha, double bound_b,
                  const std::string& loss) {
  const RiskSpec spec{alpha, bound_b, parse_loss_kind(loss)};
  validate(spec);  // before any io: bad flag combinations never touch files
  const std::vector<Sample> samples = load_manifest(manifest);
  const LambdaGrid grid = LambdaGrid::uniform(g.grid_points);

  std::vector<LossCurve> curves;
  curves.reserve(samples.size());
  for (const Sample& s : samples) curves.push_back(loss_curve(s, grid, spec.kind));
  const CalibrationResult result = select_threshold(curves, spec);

  nlohmann::json doc{{"alpha", spec.alpha},
                     {"bound_b", spec.bound_b},
                     {"kind", std::string(to_string(spec.kind))},
                     {"grid_points", g.grid_points},
                     {"n_cal", result.n_cal},
                     {"lambda_hat", result.lambda_hat},
                     {"feasible", result.feasible},
                     {"achieved_calibration_loss", result.achieved_calibration_loss}};
  if (result.feasible) doc["certified_bound"] = certified_bound(result);

  fs::create_directories(g.out);
  const fs::path out_path = fs::path(g.out) / "calibration.json";
  write_text_atomic(out_path, doc.dump(2) + "\n");
  say(g, out_path.string());
  if (!result.feasible) {
    std::cerr << "calibration infeasible: no grid threshold satisfies the risk condition\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

int cmd_experiment(const GlobalOpts& g, const std::string& manifest, const std::string& loss,
                   const std::string& alphas_text, int trials, double cal_fraction) {
  const LossKind kind = parse_loss_kind(loss);
  const std::vector<double> alphas = parse_alphas(alphas_text);
  const std::vector<Sample> samples = load_manifest(manifest);
  const LambdaGrid grid = LambdaGrid::uniform(g.grid_points);
  const SplitSpec split_spec{cal_fraction, trials, g.seed};

  const SweepReport report = alpha_sweep(samples, split_spec, kind, grid, alphas);

  const std::string canonical = "experiment|loss=" + std::string(to_string(kind)) +
                                "|alphas=" + join_g17(alphas) + "|trials=" + std::to_string(trials) +
                                "|cal_fraction=" + format_g17(cal_fraction) +
                                "|grid_points=" + std::to_string(g.grid_points) +
                                "|seed=" + std::to_string(g.seed) +
                                "|n=" + std::to_string(samples.size());
  const RunMeta meta{fnv1a_hex(canonical), g.seed};
  const std::vector<ReportRow> rows = to_rows(report, meta);

  fs::create_directories(g.out);
  write_report(rows, fs::path(g.out) / "report.csv", ReportFormat::Csv);
  write_report(rows, fs::path(g.out) / "report.json", ReportFormat::Json);
  write_plot_csv(report, fs::path(g.out) / "plot.csv");
  say(g, (fs::path(g.out) / "report.csv").string());
  say(g, (fs::path(g.out) / "report.json").string());
  say(g, (fs::path(g.out) / "plot.csv").string());
  return kExitOk;
}

int cmd_ratio_ablation(const GlobalOpts& g, const std::string& manifest, const std::string& loss,
                       double alpha, const std::string& ratios_text) {
  const LossKind kind = parse_loss_kind(loss);
  const std::vector<double> ratios = parse_ratios(ratios_text);
  if (!(alpha > 0.0 && alpha < 1.0))
    raise(ErrorCode::ConfigInvalid, "alpha " + std::to_string(alpha) + " outside (0, 1)");
  const std::vector<Sample> samples = load_manifest(manifest);
  const LambdaGrid grid = LambdaGrid::uniform(g.grid_points);

  const SweepReport report = ratio_sweep(samples, ratios, kind, grid, alpha, g.seed);

  const std::string canonical = "ratio-ablation|loss=" + std::string(to_string(kind)) +
                                "|alpha=" + format_g17(alpha) + "|ratios=" + join_g17(ratios) +
                                "|grid_points=" + std::to_string(g.grid_points) +
                                "|seed=" + std::to_string(g.seed) +
                                "|n=" + std::to_string(samples.size());
  const RunMeta meta{fnv1a_hex(canonical), g.seed};
  const std::vector<ReportRow> rows = to_rows(report, meta);

  fs::create_directories(g.out);
  write_report(rows, fs::path(g.out) / "report.csv", ReportFormat::Csv);
  write_report(rows, fs::path(g.out) / "report.json", ReportFormat::Json);
  say(g, (fs::path(g.out) / "report.csv").string());
  say(g, (fs::path(g.out) / "report.json").string());
  return kExitOk;
}

int cmd_curves(const GlobalOpts& g, const std::string& manifest, const std::string& loss) {
  const LossKind kind = parse_loss_kind(loss);
  const std::vector<Sample> samples = load_manifest(manifest);
  if (samples.empty()) raise(ErrorCode::EmptyCalibrationSet, "manifest lists no samples");
  const LambdaGrid grid = LambdaGrid::uniform(g.grid_points);

  std::string csv = "sample_id,lambda,loss,empty_prediction,empty_truth\n";
  std::vector<LossCurve> curves;
  curves.reserve(samples.size());
  for (const Sample& s : samples) {
    SampleCurves sc = sample_curves(s, grid);
    const Eigen::ArrayXd& losses = kind == LossKind::FDR ? sc.fdr : sc.fnr;
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
      csv += s.id;
      csv += ',';
      csv += format_g17(grid[j]);
      csv += ',';
      csv += format_g17(losses[j]);
      csv += ',';
      csv += sc.set_size[j] == 0.0 ? '1' : '0';
      csv += ',';
      csv += sc.truth_size == 0 ? '1' : '0';
      csv += '\n';
    }
    curves.push_back(LossCurve{kind, grid, losses});
  }
  const Eigen::ArrayXd avg = average_loss_curve(curves);
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    csv += "__mean__,";
    csv += format_g17(grid[j]);
    csv += ',';
    csv += format_g17(avg[j]);
    csv += ",0,0\n";
  }

  fs::create_directories(g.out);
  const fs::path out_path = fs::path(g.out) / "curves.csv";
  write_text_atomic(out_path, csv);
  say(g, out_path.string());
  return kExitOk;
}

int cmd_import_pgm(const GlobalOpts& g, const std::string& in_path, const std::string& out_file) {
  const BinaryMask mask = read_pgm_mask(in_path);
  const fs::path out_path(out_file);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  write_mask(out_path, mask);
  say(g, out_path.string());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conformal risk control for binary segmentation"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "master rng seed")->capture_default_str();
  app.add_option("--out", g.out, "output directory (created if absent)")->capture_default_str();
  app.add_option("--grid-points", g.grid_points, "thresholds between 1 and 0, inclusive")
      ->check(CLI::Range(2, 1000001))
      ->capture_default_str();
  app.add_flag("--quiet", g.quiet, "suppress non-error output");

  SynthConfig synth_config;
  std::string blob_shape = "ellipse";
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset plus manifest");
  synth->fallthrough();
  synth->add_option("--height", synth_config.height)->check(CLI::Range(1, 1 << 20))->capture_default_str();
  synth->add_option("--width", synth_config.width)->check(CLI::Range(1, 1 << 20))->capture_default_str();
  synth->add_option("--n", synth_config.n_samples, "number of samples")->check(CLI::Range(1, 1 << 24))->capture_default_str();
  synth->add_option("--fg-mean", synth_config.fg_mean)->capture_default_str();
  synth->add_option("--bg-mean", synth_config.bg_mean)->capture_default_str();
  synth->add_option("--noise-std", synth_config.noise_std)->capture_default_str();
  synth->add_option("--blob", blob_shape, "ellipse or rectangle")->capture_default_str();
  synth->add_option("--blob-min", synth_config.blob.min_area_frac, "min blob area fraction")->capture_default_str();
  synth->add_option("--blob-max", synth_config.blob.max_area_frac, "max blob area fraction")->capture_default_str();

  std::string manifest, loss = "fnr";
  double alpha = 0.25, bound_b = 1.0;
  auto* calibrate = app.add_subcommand("calibrate", "select a certified threshold from a dataset");
  calibrate->fallthrough();
  calibrate->add_option("--manifest", manifest, "dataset manifest")->required();
  calibrate->add_option("--alpha", alpha, "target risk level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  calibrate->add_option("--bound-b", bound_b, "a-priori bound on one loss")->capture_default_str();
  calibrate->add_option("--loss", loss, "fdr or fnr")->capture_default_str();

  std::string alphas_text = "0.1:0.9:0.1";
  int trials = 10;
  double cal_fraction = 0.5;
  auto* experiment = app.add_subcommand("experiment", "alpha sweep over repeated random splits");
  experiment->fallthrough();
  experiment->add_option("--manifest", manifest, "dataset manifest")->required();
  experiment->add_option("--loss", loss, "fdr or fnr")->capture_default_str();
  experiment->add_option("--alphas", alphas_text, "start:stop:step or comma list")->capture_default_str();
  experiment->add_option("--trials", trials)->check(CLI::Range(1, 1 << 20))->capture_default_str();
  experiment->add_option("--cal-fraction", cal_fraction)->check(CLI::Range(0.0, 1.0))->capture_default_str();

  std::string ratios_text = "9:1,8:2,7:3,6:4,5:5,4:6,3:7,2:8,1:9";
  auto* ratio = app.add_subcommand("ratio-ablation", "sweep the calibration/test ratio at fixed alpha");
  ratio->fallthrough();
  ratio->add_option("--manifest", manifest, "dataset manifest")->required();
  ratio->add_option("--loss", loss, "fdr or fnr")->capture_default_str();
  ratio->add_option("--alpha", alpha, "target risk level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  ratio->add_option("--ratios", ratios_text, "comma list of cal:test ratios")->capture_default_str();

  auto* curves = app.add_subcommand("curves", "dump per-sample and mean loss curves");
  curves->fallthrough();
  curves->add_option("--manifest", manifest, "dataset manifest")->required();
  curves->add_option("--loss", loss, "fdr or fnr")->capture_default_str();

  std::string pgm_in, pgm_out;
  auto* import_pgm = app.add_subcommand("import-pgm", "convert an 8-bit PGM (P5) to a mask file");
  import_pgm->fallthrough();
  import_pgm->add_option("--in", pgm_in, "input .pgm")->required();
  import_pgm->add_option("--out-file", pgm_out, "output mask path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      synth_config.blob.shape = parse_blob_shape(blob_shape);
      synth_config.seed = g.seed;
      return cmd_synth(g, synth_config);
    }
    if (calibrate->parsed()) return cmd_calibrate(g, manifest, alpha, bound_b, loss);
    if (experiment->parsed())
      return cmd_experiment(g, manifest, loss, alphas_text, trials, cal_fraction);
    if (ratio->parsed()) return cmd_ratio_ablation(g, manifest, loss, alpha, ratios_text);
    if (curves->parsed()) return cmd_curves(g, manifest, loss);
    if (import_pgm->parsed()) return cmd_import_pgm(g, pgm_in, pgm_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
