#pragma once

#include <optional>
#include <string>

#include "lml/dataset.hpp"
#include "lml/report.hpp"
#include "lml/trainer.hpp"

namespace lml {

// Command implementations behind the `lml` binary. Each returns a process
// exit code: 0 success, 2 configuration error, 3 data-format error,
// 4 runtime numeric error, 1 anything else.

struct GenOptions {
  SyntheticConfig synthetic;
  std::string out;
};
int cmd_gen(const GenOptions& opt);

struct RunOptions {
  std::string data;        // dataset path; empty with synthetic=true
  bool synthetic = false;  // generate the stream in-process
  // Shape overrides for the in-process synthetic stream.
  std::optional<int> tasks, classes_per_task, feature_dim, train_per_task, test_per_task;
  std::optional<double> cooc, noise;
  std::string preset = "agcn-default";
  std::optional<double> lambda1, lambda2, lambda3;
  std::optional<double> lr;
  std::optional<int> batch;
  std::optional<uint64_t> seed;
  bool ablate_inter_task = false;
  bool resume = false;
  std::string out;
};
int cmd_run(const RunOptions& opt);

int cmd_report(const ReportOptions& opt);

// Maps an exception (re-thrown from `fn`) to the exit-code contract.
int exit_code_for_current_exception();

}  // namespace lml
