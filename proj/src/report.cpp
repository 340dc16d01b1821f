#include "lml/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lml/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lml {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void emit_metric_lines(std::ostream& out, const BoundaryReport& b) {
  struct Entry {
    const char* name;
    double value;
    std::optional<double> forget, forget_agg;
  };
  const Entry entries[] = {
      {"mAP", b.aggregate.map, b.forget ? std::optional(b.forget->map) : std::nullopt,
       b.forget_aggregate ? std::optional(b.forget_aggregate->map) : std::nullopt},
      {"CF1", b.aggregate.cf1, b.forget ? std::optional(b.forget->cf1) : std::nullopt,
       b.forget_aggregate ? std::optional(b.forget_aggregate->cf1) : std::nullopt},
      {"OF1", b.aggregate.of1, b.forget ? std::optional(b.forget->of1) : std::nullopt,
       b.forget_aggregate ? std::optional(b.forget_aggregate->of1) : std::nullopt},
  };
  for (const auto& e : entries) {
    out << "metric t=" << b.t + 1 << " name=" << e.name << " value=" << fmt(e.value)
        << " forgetting=" << (e.forget ? fmt(*e.forget) : "na") << " forgetting_aggregate="
        << (e.forget_agg ? fmt(*e.forget_agg) : "na") << "\n";
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

// key=value tokens after the line tag.
std::string field(const std::vector<std::string>& tokens, const std::string& key) {
  const std::string prefix = key + "=";
  for (const auto& t : tokens) {
    if (t.rfind(prefix, 0) == 0) return t.substr(prefix.size());
  }
  throw FormatError("results line missing field '" + key + "'");
}

}  // namespace

void write_run_files(const RunConfig& cfg, const TaskStream& stream, const RunResult& result) {
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);

  std::ofstream txt(out / "results.txt", std::ios::trunc);
  if (!txt) throw FormatError("cannot open results.txt for writing");
  txt << "# lml-results schema=" << kResultsSchemaVersion << "\n";
  txt << "run id=" << result.run_id << "\n";
  txt << "config " << cfg.to_json() << "\n";
  txt << "dataset checksum=" << hex64(result.dataset_checksum) << " source="
      << (cfg.data_path.empty() ? std::string("synthetic") : cfg.data_path) << "\n";
  txt << "classes ";
  const auto& names = stream.labels.names();
  for (size_t i = 0; i < names.size(); ++i) txt << (i ? "," : "") << names[i];
  txt << "\n";
  for (const auto& b : result.boundaries) {
    emit_metric_lines(txt, b);
    for (int k = 0; k <= b.t; ++k) {
      const MetricValues& now = b.per_task[static_cast<size_t>(k)];
      // First-trained row for task k is its own per-task entry at boundary k.
      const MetricValues& first = result.boundaries[static_cast<size_t>(k)].per_task[static_cast<size_t>(k)];
      txt << "pertask t=" << b.t + 1 << " task=" << k + 1 << " name=mAP first="
          << fmt(first.map) << " now=" << fmt(now.map) << "\n";
      txt << "pertask t=" << b.t + 1 << " task=" << k + 1 << " name=CF1 first="
          << fmt(first.cf1) << " now=" << fmt(now.cf1) << "\n";
      txt << "pertask t=" << b.t + 1 << " task=" << k + 1 << " name=OF1 first="
          << fmt(first.of1) << " now=" << fmt(now.of1) << "\n";
    }
  }
  for (const auto& s : result.samples) {
    txt << "sample example=" << s.example << " true=";
    for (size_t i = 0; i < s.true_ids.size(); ++i) {
      txt << (i ? ";" : "") << names[static_cast<size_t>(s.true_ids[i])];
    }
    if (s.true_ids.empty()) txt << "-";
    txt << " scores=";
    for (size_t i = 0; i < s.scores.size(); ++i) txt << (i ? ";" : "") << fmt(s.scores[i]);
    txt << "\n";
  }
  txt << "end\n";
  if (!txt) throw FormatError("short write to results.txt");

  std::ofstream csv(out / "summary.csv", std::ios::trunc);
  if (!csv) throw FormatError("cannot open summary.csv for writing");
  csv << "run,preset,t,metric,value,forgetting,forgetting_aggregate\n";
  for (const auto& b : result.boundaries) {
    const struct {
      const char* name;
      double value;
      const double* forget;
      const double* forget_agg;
    } rows[] = {
        {"mAP", b.aggregate.map, b.forget ? &b.forget->map : nullptr,
         b.forget_aggregate ? &b.forget_aggregate->map : nullptr},
        {"CF1", b.aggregate.cf1, b.forget ? &b.forget->cf1 : nullptr,
         b.forget_aggregate ? &b.forget_aggregate->cf1 : nullptr},
        {"OF1", b.aggregate.of1, b.forget ? &b.forget->of1 : nullptr,
         b.forget_aggregate ? &b.forget_aggregate->of1 : nullptr},
    };
    for (const auto& r : rows) {
      csv << result.run_id << "," << cfg.preset << "," << b.t + 1 << "," << r.name << ","
          << fmt(r.value) << "," << (r.forget ? fmt(*r.forget) : "") << ","
          << (r.forget_agg ? fmt(*r.forget_agg) : "") << "\n";
    }
  }
  if (!csv) throw FormatError("short write to summary.csv");
}

RunFileData read_run_file(const std::string& path) {
  fs::path p(path);
  if (fs::is_directory(p)) p /= "results.txt";
  std::ifstream in(p);
  if (!in) throw FormatError("cannot open results file '" + p.string() + "'");

  RunFileData data;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty results file '" + p.string() + "'");
  const std::string header = "# lml-results schema=";
  if (line.rfind(header, 0) != 0) {
    throw FormatError("'" + p.string() + "' is not an lml results file");
  }
  data.schema = std::stoi(line.substr(header.size()));
  if (data.schema != kResultsSchemaVersion) {
    throw FormatError("results schema " + std::to_string(data.schema) +
                      " unsupported, expected " + std::to_string(kResultsSchemaVersion));
  }
  bool saw_end = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line == "end") {
      saw_end = true;
      continue;
    }
    const auto tokens = split(line, ' ');
    const std::string& tag = tokens[0];
    if (tag == "run") {
      data.run_id = field(tokens, "id");
    } else if (tag == "config") {
      data.config_json = line.substr(7);
      data.preset = json::parse(data.config_json).value("preset", std::string());
    } else if (tag == "dataset") {
      data.dataset_checksum = std::stoull(field(tokens, "checksum"), nullptr, 16);
    } else if (tag == "classes") {
      data.class_names = split(tokens.at(1), ',');
    } else if (tag == "metric") {
      MetricRow row;
      row.t = std::stoi(field(tokens, "t"));
      row.name = field(tokens, "name");
      row.value = std::stod(field(tokens, "value"));
      const std::string f = field(tokens, "forgetting");
      if (f != "na") row.forget = std::stod(f);
      const std::string fa = field(tokens, "forgetting_aggregate");
      if (fa != "na") row.forget_aggregate = std::stod(fa);
      data.metrics.push_back(std::move(row));
    } else if (tag == "sample") {
      SampleRow row;
      row.example = std::stoi(field(tokens, "example"));
      const std::string truth = field(tokens, "true");
      if (truth != "-") row.true_names = split(truth, ';');
      for (const auto& s : split(field(tokens, "scores"), ';')) {
        row.scores.push_back(std::stod(s));
      }
      data.samples.push_back(std::move(row));
    }
    // pertask lines are derivable from metric history; readers skip them.
  }
  if (!saw_end) throw FormatError("results file '" + p.string() + "' truncated (no end line)");
  if (data.run_id.empty() || data.config_json.empty()) {
    throw FormatError("results file '" + p.string() + "' missing run/config lines");
  }
  return data;
}

void write_report(const ReportOptions& opt) {
  if (opt.inputs.empty()) throw ConfigError("report: need at least one input run");
  if (opt.out_prefix.empty()) throw ConfigError("report: out prefix must not be empty");
  if (!(opt.display_threshold > 0.0 && opt.display_threshold < 1.0)) {
    throw ConfigError("display_threshold must lie in (0, 1)");
  }

  std::vector<RunFileData> runs;
  for (const auto& input : opt.inputs) runs.push_back(read_run_file(input));
  std::stable_sort(runs.begin(), runs.end(), [](const RunFileData& a, const RunFileData& b) {
    return a.preset != b.preset ? a.preset < b.preset : a.run_id < b.run_id;
  });

  const auto final_value = [](const RunFileData& run, const char* metric,
                              bool want_forget) -> std::string {
    int best_t = -1;
    const MetricRow* best = nullptr;
    for (const auto& row : run.metrics) {
      if (row.name == metric && row.t > best_t) {
        best_t = row.t;
        best = &row;
      }
    }
    if (best == nullptr) return "na";
    if (!want_forget) return fmt(best->value);
    return best->forget ? fmt(*best->forget) : "na";
  };

  const fs::path txt_path(opt.out_prefix + ".txt");
  if (txt_path.has_parent_path()) fs::create_directories(txt_path.parent_path());
  std::ofstream txt(txt_path, std::ios::trunc);
  if (!txt) throw FormatError("cannot open '" + txt_path.string() + "' for writing");
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-20s %-16s %10s %10s %10s %12s %12s %12s", "preset", "run",
                "mAP", "CF1", "OF1", "forget-mAP", "forget-CF1", "forget-OF1");
  txt << buf << "\n";
  for (const auto& run : runs) {
    std::snprintf(buf, sizeof(buf), "%-20s %-16s %10s %10s %10s %12s %12s %12s",
                  run.preset.c_str(), run.run_id.c_str(), final_value(run, "mAP", false).c_str(),
                  final_value(run, "CF1", false).c_str(), final_value(run, "OF1", false).c_str(),
                  final_value(run, "mAP", true).c_str(), final_value(run, "CF1", true).c_str(),
                  final_value(run, "OF1", true).c_str());
    txt << buf << "\n";
  }
  for (const auto& run : runs) {
    if (run.samples.empty()) continue;
    txt << "\nlabels above " << fmt(opt.display_threshold) << " (preset " << run.preset
        << ", run " << run.run_id << "):\n";
    for (const auto& s : run.samples) {
      txt << "  example " << s.example << ": true [";
      for (size_t i = 0; i < s.true_names.size(); ++i) {
        txt << (i ? " " : "") << s.true_names[i];
      }
      txt << "] predicted [";
      bool first = true;
      for (size_t c = 0; c < s.scores.size(); ++c) {
        if (s.scores[c] > opt.display_threshold) {
          if (!first) txt << " ";
          first = false;
          txt << (c < run.class_names.size() ? run.class_names[c] : "?") << " ("
              << fmt(s.scores[c]) << ")";
        }
      }
      txt << "]\n";
    }
  }
  if (!txt) throw FormatError("short write to '" + txt_path.string() + "'");

  std::ofstream csv(opt.out_prefix + ".csv", std::ios::trunc);
  if (!csv) throw FormatError("cannot open '" + opt.out_prefix + ".csv' for writing");
  csv << "preset,run,mAP,CF1,OF1,forget_mAP,forget_CF1,forget_OF1\n";
  for (const auto& run : runs) {
    csv << run.preset << "," << run.run_id << "," << final_value(run, "mAP", false) << ","
        << final_value(run, "CF1", false) << "," << final_value(run, "OF1", false) << ","
        << final_value(run, "mAP", true) << "," << final_value(run, "CF1", true) << ","
        << final_value(run, "OF1", true) << "\n";
  }
  if (!csv) throw FormatError("short write to report csv");

  std::ofstream series(opt.out_prefix + "_series.csv", std::ios::trunc);
  if (!series) throw FormatError("cannot open series csv for writing");
  series << "preset,run,t,metric,value\n";
  for (const auto& run : runs) {
    for (const auto& row : run.metrics) {
      series << run.preset << "," << run.run_id << "," << row.t << "," << row.name << ","
             << fmt(row.value) << "\n";
    }
  }
  if (!series) throw FormatError("short write to series csv");
}

}  // namespace lml
