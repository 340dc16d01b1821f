#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lml/cli.hpp"
#include "lml/log.hpp"
#include "lml/serialize.hpp"

using namespace lml;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunOptions small_run(const fs::path& out) {
  RunOptions opt;
  opt.synthetic = true;
  opt.tasks = 3;
  opt.classes_per_task = 2;
  opt.feature_dim = 8;
  opt.train_per_task = 24;
  opt.test_per_task = 8;
  opt.batch = 8;
  opt.seed = 4;
  opt.out = out.string();
  return opt;
}

}  // namespace

TEST_CASE("gen writes deterministic dataset files") {
  TempDir dir("lml_cli_gen");
  GenOptions opt;
  opt.synthetic.num_tasks = 2;
  opt.synthetic.classes_per_task = 3;
  opt.synthetic.feature_dim = 8;
  opt.synthetic.train_per_task = 10;
  opt.synthetic.test_per_task = 5;
  opt.synthetic.seed = 7;
  opt.out = (dir.path / "a.lmld").string();
  CHECK(cmd_gen(opt) == 0);
  opt.out = (dir.path / "b.lmld").string();
  CHECK(cmd_gen(opt) == 0);
  CHECK(file_checksum((dir.path / "a.lmld").string()) ==
        file_checksum((dir.path / "b.lmld").string()));
}

TEST_CASE("gen rejects bad flags and unwritable paths") {
  GenOptions opt;
  opt.synthetic.train_per_task = 0;
  opt.out = "/tmp/lml_never_written.lmld";
  CHECK(cmd_gen(opt) == 2);

  GenOptions bad_path;
  bad_path.out = "/nonexistent-dir/x.lmld";
  CHECK(cmd_gen(bad_path) == 3);

  GenOptions no_out;
  CHECK(cmd_gen(no_out) == 2);
}

TEST_CASE("run writes results, summary and per-boundary correlation CSVs") {
  TempDir dir("lml_cli_run");
  const RunOptions opt = small_run(dir.path / "out");
  CHECK(cmd_run(opt) == 0);
  CHECK(fs::exists(dir.path / "out" / "results.txt"));
  CHECK(fs::exists(dir.path / "out" / "summary.csv"));
  for (int t = 1; t <= 3; ++t) {
    CHECK(fs::exists(dir.path / "out" / ("acm_t" + std::to_string(t) + ".csv")));
    CHECK(fs::exists(dir.path / "out" / ("checkpoint_t" + std::to_string(t)) / "model.lmlw"));
  }

  // Determinism: a second run into another directory is byte-identical.
  RunOptions again = small_run(dir.path / "out2");
  CHECK(cmd_run(again) == 0);
  CHECK(slurp(dir.path / "out" / "results.txt") == slurp(dir.path / "out2" / "results.txt"));
  CHECK(slurp(dir.path / "out" / "summary.csv") == slurp(dir.path / "out2" / "summary.csv"));
}

TEST_CASE("run records the fine-tuning preset weights in the header") {
  TempDir dir("lml_cli_ft");
  RunOptions opt = small_run(dir.path / "out");
  opt.preset = "fine-tuning";
  CHECK(cmd_run(opt) == 0);
  const RunFileData data = read_run_file((dir.path / "out").string());
  CHECK(data.preset == "fine-tuning");
  CHECK(data.config_json.find("\"lambda2\":0.0") != std::string::npos);
  CHECK(data.config_json.find("\"lambda3\":0.0") != std::string::npos);
}

TEST_CASE("run validates its flags") {
  RunOptions neither;
  CHECK(cmd_run(neither) == 2);

  TempDir dir("lml_cli_badrun");
  RunOptions opt = small_run(dir.path / "out");
  opt.batch = 0;
  CHECK(cmd_run(opt) == 2);

  RunOptions missing;
  missing.data = (dir.path / "missing.lmld").string();
  missing.out = (dir.path / "out").string();
  CHECK(cmd_run(missing) == 3);

  RunOptions unknown = small_run(dir.path / "out");
  unknown.preset = "no-such-preset";
  CHECK(cmd_run(unknown) == 2);
}

TEST_CASE("grid preset writes one run per weight row") {
  TempDir dir("lml_cli_grid");
  RunOptions opt = small_run(dir.path / "grid");
  opt.preset = "loss-weight-grid";
  opt.train_per_task = 16;
  CHECK(cmd_run(opt) == 0);
  int found = 0;
  for (const auto& entry : fs::directory_iterator(dir.path / "grid")) {
    if (entry.is_directory() && fs::exists(entry.path() / "results.txt")) ++found;
  }
  CHECK(found == 6);
}

TEST_CASE("report merges runs into sorted tables") {
  TempDir dir("lml_cli_report");
  RunOptions a = small_run(dir.path / "zz");
  a.preset = "fine-tuning";
  REQUIRE(cmd_run(a) == 0);
  RunOptions b = small_run(dir.path / "aa");
  b.preset = "agcn-default";
  REQUIRE(cmd_run(b) == 0);

  ReportOptions rep;
  rep.inputs = {(dir.path / "zz").string(), (dir.path / "aa").string()};
  rep.out_prefix = (dir.path / "cmp").string();
  CHECK(cmd_report(rep) == 0);

  const std::string table = slurp(dir.path / "cmp.txt");
  const auto agcn_pos = table.find("agcn-default");
  const auto ft_pos = table.find("fine-tuning");
  REQUIRE(agcn_pos != std::string::npos);
  REQUIRE(ft_pos != std::string::npos);
  CHECK(agcn_pos < ft_pos);  // sorted by preset name
  CHECK(fs::exists(dir.path / "cmp.csv"));
  CHECK(fs::exists(dir.path / "cmp_series.csv"));

  // Pass-through: the single-run report repeats the run's final numbers.
  const RunFileData run_data = read_run_file((dir.path / "aa").string());
  double final_map = -1;
  int best_t = -1;
  for (const auto& row : run_data.metrics) {
    if (row.name == "mAP" && row.t > best_t) {
      best_t = row.t;
      final_map = row.value;
    }
  }
  char needle[64];
  std::snprintf(needle, sizeof(needle), "%.6f", final_map);
  CHECK(slurp(dir.path / "cmp.csv").find(needle) != std::string::npos);
}

TEST_CASE("report applies the display threshold to sample listings") {
  TempDir dir("lml_cli_display");
  RunOptions opt = small_run(dir.path / "out");
  REQUIRE(cmd_run(opt) == 0);
  ReportOptions rep;
  rep.inputs = {(dir.path / "out").string()};
  rep.out_prefix = (dir.path / "rep").string();
  rep.display_threshold = 0.7;
  CHECK(cmd_report(rep) == 0);
  const std::string table = slurp(dir.path / "rep.txt");
  CHECK(table.find("labels above 0.700000") != std::string::npos);
  CHECK(table.find("example 0:") != std::string::npos);
}

TEST_CASE("report rejects mismatched schema versions by name") {
  TempDir dir("lml_cli_schema");
  std::ofstream bad(dir.path / "results.txt");
  bad << "# lml-results schema=2\nrun id=x\nend\n";
  bad.close();
  ReportOptions rep;
  rep.inputs = {dir.path.string()};
  rep.out_prefix = (dir.path / "rep").string();
  CHECK(cmd_report(rep) == 3);
  try {
    read_run_file(dir.path.string());
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);
  }
}

TEST_CASE("log level parsing") {
  CHECK(parse_log_level(nullptr) == LogLevel::kInfo);
  CHECK(parse_log_level("error") == LogLevel::kError);
  CHECK(parse_log_level("debug") == LogLevel::kDebug);
  CHECK(parse_log_level("bogus") == LogLevel::kInfo);
}

TEST_CASE("run on a generated dataset file matches the synthetic path") {
  TempDir dir("lml_cli_file");
  GenOptions gen;
  gen.synthetic.num_tasks = 3;
  gen.synthetic.classes_per_task = 2;
  gen.synthetic.feature_dim = 8;
  gen.synthetic.train_per_task = 24;
  gen.synthetic.test_per_task = 8;
  gen.synthetic.seed = 4;
  gen.out = (dir.path / "data.lmld").string();
  REQUIRE(cmd_gen(gen) == 0);

  RunOptions from_file;
  from_file.data = gen.out;
  from_file.batch = 8;
  from_file.seed = 4;
  from_file.out = (dir.path / "out_file").string();
  CHECK(cmd_run(from_file) == 0);

  RunOptions synth = small_run(dir.path / "out_synth");
  CHECK(cmd_run(synth) == 0);

  // Same stream, same seed: identical metric lines (config blocks differ).
  const RunFileData fa = read_run_file((dir.path / "out_file").string());
  const RunFileData fb = read_run_file((dir.path / "out_synth").string());
  REQUIRE(fa.metrics.size() == fb.metrics.size());
  CHECK(fa.dataset_checksum == fb.dataset_checksum);
  for (size_t i = 0; i < fa.metrics.size(); ++i) {
    CHECK(fa.metrics[i].value == fb.metrics[i].value);
  }
}
