// End-to-end tests driving the installed binary through std::system, pinning
// exit codes, output layout and byte-level determinism.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const std::string& stdout_to = "/dev/null") {
  const std::string cmd =
      std::string(SEGRISK_CLI_PATH) + " " + args + " >" + stdout_to + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  REQUIRE(out.good());
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("segrisk_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// name -> file bytes for every regular file in the directory
std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

std::string make_dataset(const TempDir& dir, const std::string& name, int n,
                         const std::string& extra = "") {
  const fs::path out = dir.path / name;
  const int rc = run_cli("synth --quiet --out " + out.string() + " --n " + std::to_string(n) +
                         " --height 8 --width 8 " + extra);
  REQUIRE(rc == 0);
  return (out / "manifest.json").string();
}

}  // namespace

TEST_CASE("synth writes a loadable dataset and is byte-stable across reruns") {
  TempDir dir("synth");
  const std::string flags = "synth --quiet --n 6 --height 8 --width 8 --noise-std 0.2 --seed 5";
  CHECK(run_cli(flags + " --out " + (dir.path / "a").string()) == 0);
  CHECK(run_cli(flags + " --out " + (dir.path / "b").string()) == 0);

  const auto a = dir_contents(dir.path / "a");
  const auto b = dir_contents(dir.path / "b");
  CHECK(a.size() == 13);  // 6 prob + 6 mask + manifest
  CHECK(a == b);
  CHECK(a.count("manifest.json") == 1);
  CHECK(a.count("prob_00000.pfg1") == 1);
  CHECK(a.count("mask_00005.msk1") == 1);
}

TEST_CASE("synth rejects impossible configurations") {
  TempDir dir("synthbad");
  const std::string out = (dir.path / "x").string();
  CHECK(run_cli("synth --out " + out + " --fg-mean 0.1 --bg-mean 0.9") == 3);
  CHECK(run_cli("synth --out " + out + " --blob cube") == 3);
  CHECK(run_cli("synth --out " + out + " --n 0") == 2);  // rejected by the flag range
}

TEST_CASE("calibrate writes a certificate and exits by feasibility") {
  TempDir dir("cal");
  const std::string manifest = make_dataset(dir, "data", 12);

  SUBCASE("feasible run") {
    const std::string out = (dir.path / "res").string();
    CHECK(run_cli("calibrate --manifest " + manifest + " --alpha 0.25 --out " + out) == 0);
    const auto doc = nlohmann::json::parse(slurp(fs::path(out) / "calibration.json"));
    CHECK(doc.at("alpha").get<double>() == 0.25);
    CHECK(doc.at("kind").get<std::string>() == "fnr");
    CHECK(doc.at("n_cal").get<int>() == 12);
    CHECK(doc.at("feasible").get<bool>());
    const double lambda_hat = doc.at("lambda_hat").get<double>();
    CHECK(lambda_hat >= 0.0);
    CHECK(lambda_hat <= 1.0);
    CHECK(doc.at("certified_bound").get<double>() <= 0.25);
  }
  SUBCASE("a single calibration sample is infeasible at alpha 0.25") {
    const std::string one = make_dataset(dir, "one", 1);
    const std::string out = (dir.path / "res1").string();
    CHECK(run_cli("calibrate --manifest " + one + " --alpha 0.25 --out " + out) == 5);
    const auto doc = nlohmann::json::parse(slurp(fs::path(out) / "calibration.json"));
    CHECK_FALSE(doc.at("feasible").get<bool>());
    CHECK(doc.at("lambda_hat").get<double>() == 1.0);
    CHECK_FALSE(doc.contains("certified_bound"));
  }
}

TEST_CASE("flag errors, config errors and io errors use distinct exit codes") {
  TempDir dir("codes");
  const std::string nowhere = (dir.path / "missing.json").string();
  const std::string out = " --out " + (dir.path / "o").string();

  // usage: rejected by the parser itself
  CHECK(run_cli("calibrate --manifest " + nowhere + " --alpha 1.5" + out) == 2);
  CHECK(run_cli("calibrate" + out) == 2);  // --manifest is required
  CHECK(run_cli("frobnicate" + out) == 2);
  CHECK(run_cli("") == 2);

  // config: bad value combinations are caught before any file is touched
  CHECK(run_cli("calibrate --manifest " + nowhere + " --alpha 0.25 --bound-b 0.2" + out) == 3);

  // io: a well-formed invocation pointing at a missing dataset
  CHECK(run_cli("calibrate --manifest " + nowhere + " --alpha 0.25" + out) == 4);
}

TEST_CASE("experiment emits reports with one row per (alpha, trial)") {
  TempDir dir("exp");
  const std::string manifest = make_dataset(dir, "data", 24, "--noise-std 0.15 --seed 3");
  const std::string flags = "experiment --quiet --manifest " + manifest +
                            " --alphas 0.2:0.8:0.3 --trials 2 --seed 11";

  const fs::path out1 = dir.path / "r1";
  CHECK(run_cli(flags + " --out " + out1.string()) == 0);

  const std::string csv = slurp(out1 / "report.csv");
  CHECK(line_count(csv) == 7);  // header + 3 alphas x 2 trials
  const std::string plot = slurp(out1 / "plot.csv");
  CHECK(line_count(plot) == 4);  // header + one row per alpha
  CHECK(plot.rfind("alpha,mean_loss,std_loss,companion_mean,companion_std\n", 0) == 0);

  const auto doc = nlohmann::json::parse(slurp(out1 / "report.json"));
  REQUIRE(doc.size() == 6);
  CHECK(doc[0].at("alpha").get<double>() == 0.2);
  CHECK(doc[0].at("trial").get<int>() == 0);
  CHECK(doc[1].at("trial").get<int>() == 1);
  CHECK(doc[5].at("alpha").get<double>() == 0.8);
  for (const auto& row : doc) {
    CHECK(row.at("n_cal").get<int>() == 12);
    CHECK(row.at("n_test").get<int>() == 12);
    CHECK(row.at("kind").get<std::string>() == "fnr");
  }

  // identical flags, identical bytes
  const fs::path out2 = dir.path / "r2";
  CHECK(run_cli(flags + " --out " + out2.string()) == 0);
  CHECK(slurp(out2 / "report.csv") == csv);
  CHECK(slurp(out2 / "report.json") == slurp(out1 / "report.json"));
  CHECK(slurp(out2 / "plot.csv") == plot);

  // a different seed changes the splits, and with them the report
  const fs::path out3 = dir.path / "r3";
  CHECK(run_cli("experiment --quiet --manifest " + manifest +
                " --alphas 0.2:0.8:0.3 --trials 2 --seed 12 --out " + out3.string()) == 0);
  CHECK(slurp(out3 / "report.csv") != csv);
}

TEST_CASE("experiment rejects malformed sweeps") {
  TempDir dir("expbad");
  const std::string manifest = make_dataset(dir, "data", 100);
  const std::string out = " --out " + (dir.path / "o").string();
  CHECK(run_cli("experiment --manifest " + manifest + " --alphas 0.8:0.2:0.1" + out) == 3);
  CHECK(run_cli("experiment --manifest " + manifest + " --alphas 0.2:0.8:-0.1" + out) == 3);
  CHECK(run_cli("experiment --manifest " + manifest + " --alphas 1.2" + out) == 3);
  CHECK(run_cli("experiment --manifest " + manifest + " --alphas abc" + out) == 3);
  CHECK(run_cli("experiment --manifest " + manifest + " --cal-fraction 0.999" + out) == 3);
  CHECK(run_cli("experiment --manifest " + manifest + " --cal-fraction 1.5" + out) == 2);
}

TEST_CASE("ratio ablation sweeps the default nine ratios") {
  TempDir dir("ratio");
  const std::string manifest = make_dataset(dir, "data", 60);
  const fs::path out = dir.path / "r";
  CHECK(run_cli("ratio-ablation --quiet --manifest " + manifest + " --alpha 0.25 --out " +
                out.string()) == 0);
  const auto doc = nlohmann::json::parse(slurp(out / "report.json"));
  REQUIRE(doc.size() == 9);
  CHECK(doc[0].at("ratio").get<double>() == 0.9);
  CHECK(doc[4].at("ratio").get<double>() == 0.5);
  CHECK(doc[8].at("ratio").get<double>() == 0.1);
  CHECK(doc[0].at("n_cal").get<int>() == 54);
  CHECK(doc[8].at("n_cal").get<int>() == 6);
  CHECK(line_count(slurp(out / "report.csv")) == 10);
}

TEST_CASE("curves dumps per-sample rows plus aggregate rows") {
  TempDir dir("curves");
  const std::string manifest = make_dataset(dir, "data", 2);
  const fs::path out = dir.path / "c";
  CHECK(run_cli("curves --quiet --manifest " + manifest + " --grid-points 11 --out " +
                out.string()) == 0);
  const std::string csv = slurp(out / "curves.csv");
  CHECK(line_count(csv) == 1 + 2 * 11 + 11);
  CHECK(csv.rfind("sample_id,lambda,loss,empty_prediction,empty_truth\n", 0) == 0);
  CHECK(csv.find("sample_00000,1,0,0,0\n") != std::string::npos);  // lambda 1 never misses
  CHECK(csv.find("__mean__,1,0,0,0\n") != std::string::npos);
  CHECK(csv.find("__mean__,0,") != std::string::npos);
}

TEST_CASE("import-pgm converts external masks") {
  TempDir dir("pgm");
  const fs::path pgm = dir.path / "in.pgm";
  std::string bytes = "P5\n# comment\n3 2\n255\n";
  const char payload[] = {0, 1, 0, char(255), 0, char(17)};
  bytes.append(payload, sizeof payload);
  spit(pgm, bytes);

  const fs::path mask = dir.path / "out" / "m.msk1";
  CHECK(run_cli("import-pgm --in " + pgm.string() + " --out-file " + mask.string()) == 0);
  const std::string written = slurp(mask);
  REQUIRE(written.size() == 12 + 6);
  CHECK(written.compare(0, 4, "MSK1") == 0);
  CHECK(written.substr(12) == std::string("\x00\x01\x00\x01\x00\x01", 6));

  CHECK(run_cli("import-pgm --in " + (dir.path / "none.pgm").string() + " --out-file " +
                mask.string()) == 4);
}

TEST_CASE("--quiet silences informational output") {
  TempDir dir("quiet");
  const fs::path captured = dir.path / "stdout.txt";
  CHECK(run_cli("synth --quiet --out " + (dir.path / "d").string() + " --n 1",
                captured.string()) == 0);
  CHECK(slurp(captured).empty());

  CHECK(run_cli("synth --out " + (dir.path / "e").string() + " --n 1", captured.string()) == 0);
  CHECK(slurp(captured).find("manifest.json") != std::string::npos);
}
