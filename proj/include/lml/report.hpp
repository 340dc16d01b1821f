#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lml/trainer.hpp"

namespace lml {

// Writes results.txt (line-delimited, greppable) and summary.csv into
// cfg.out_dir. Both files are deterministic functions of config and data.
void write_run_files(const RunConfig& cfg, const TaskStream& stream, const RunResult& result);

struct MetricRow {
  int t = 0;
  std::string name;
  double value = 0.0;
  std::optional<double> forget;
  std::optional<double> forget_aggregate;
};

struct SampleRow {
  int example = 0;
  std::vector<std::string> true_names;
  std::vector<double> scores;  // one per class, in class order
};

struct RunFileData {
  int schema = 0;
  std::string run_id;
  std::string preset;
  std::string config_json;
  uint64_t dataset_checksum = 0;
  std::vector<std::string> class_names;
  std::vector<MetricRow> metrics;
  std::vector<SampleRow> samples;
};

// Parses one results.txt (the path may be the file or its directory).
RunFileData read_run_file(const std::string& path);

struct ReportOptions {
  std::vector<std::string> inputs;  // run directories or results.txt paths
  std::string out_prefix;           // writes <prefix>.txt, .csv, _series.csv
  double display_threshold = 0.7;
};

// Merges runs into a comparison table with per-metric forgetting, a tidy
// per-boundary series for plotting, and per-run label listings at the
// display threshold.
void write_report(const ReportOptions& opt);

}  // namespace lml
