#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lml/cooc.hpp"
#include "lml/dataset.hpp"
#include "lml/expert.hpp"
#include "lml/losses.hpp"
#include "lml/metrics.hpp"
#include "lml/model.hpp"

namespace lml {

struct RunConfig {
  // Data source: a dataset file, or the synthetic sampler when empty.
  std::string data_path;
  SyntheticConfig synthetic;

  std::string preset = "agcn-default";
  LossWeights weights{0.07, 0.93, 1e5};
  LossOptions loss_options;

  double lr = 0.05;
  double momentum = 0.9;
  // Per-tensor gradient norm cap. The preservation weight can be 1e5 and
  // higher, which plain SGD cannot absorb at this scale; the cap bounds the
  // step while keeping the update direction.
  double grad_clip = 5.0;
  int batch_size = 16;
  uint64_t seed = 1;

  int backbone_hidden = 64;
  int embed_dim = 16;
  int gcn_hidden = 32;
  int repr_dim = 32;

  double f1_threshold = 0.5;
  double display_threshold = 0.7;
  bool ablate_inter_task = false;

  std::string out_dir;  // empty: nothing is written
  bool resume = false;

  void validate() const;  // throws ConfigError naming the offending field
  std::string to_json() const;
  static RunConfig from_json(const std::string& json);
};

inline constexpr int kResultsSchemaVersion = 1;

// Counters proving the protocol held: one training forward per example,
// expert bytes untouched by optimizer steps, training label views exactly
// as wide as the current task.
struct AuditReport {
  uint64_t train_examples_seen = 0;
  uint64_t train_batches = 0;
  uint64_t expert_checks = 0;
  uint64_t expert_violations = 0;
  uint64_t label_width_violations = 0;
};

struct SampleScores {
  int example = 0;             // index within the first task's test set
  std::vector<int> true_ids;   // ground-truth class ids among seen classes
  std::vector<double> scores;  // over all seen classes
};

struct RunResult {
  std::string run_id;
  uint64_t dataset_checksum = 0;
  std::vector<BoundaryReport> boundaries;  // one per task, in order
  std::vector<SampleScores> samples;       // from the final boundary
  AuditReport audit;

  const BoundaryReport& final_boundary() const { return boundaries.back(); }
};

// Orchestrates the stream protocol: every task trained exactly once, one
// pass over its data, statistics updated before each step, evaluation and
// expert rotation at boundaries. Strictly sequential; owns all mutable
// state.
class Trainer {
 public:
  // The stream must outlive the trainer.
  Trainer(RunConfig cfg, const TaskStream& stream);

  // Full protocol over all tasks; writes result/checkpoint files when
  // configured. Honors resume by skipping completed tasks.
  RunResult run();

  // Stepwise interface used by tests; run() is the composition of these.
  void train_task(int t);
  void task_boundary(int t);

  const RunConfig& config() const { return cfg_; }
  const ModelParams& params() const { return params_; }
  const CoocStats& cooc() const { return *cooc_; }
  const ClassEmbeddings& embeddings() const { return h0_; }
  const std::optional<ExpertSnapshot>& expert() const { return expert_; }
  const AuditReport& audit() const { return audit_; }
  const std::vector<BoundaryReport>& boundaries() const { return boundaries_; }
  int completed_tasks() const { return completed_; }

  // Propagation matrix for the current statistics (ablation applied).
  Mat current_adjacency() const;

 private:
  void apply_gradients(const std::vector<Mat>& grads);
  Mat score_test(const Mat& features, const Mat& adj) const;
  void write_boundary_files(int t, const Mat& frozen);
  void collect_samples(const Mat& adj);
  bool try_resume();

  RunConfig cfg_;
  const TaskStream& stream_;
  ModelParams params_;
  ClassEmbeddings h0_;
  std::optional<CoocStats> cooc_;
  std::optional<ExpertSnapshot> expert_;
  uint64_t expert_checksum_ = 0;
  std::vector<Mat> velocity_;
  std::vector<MetricValues> first_trained_;
  std::vector<MetricValues> past_aggregates_;
  std::vector<BoundaryReport> boundaries_;
  std::vector<SampleScores> samples_;
  AuditReport audit_;
  int completed_ = -1;        // last task with a finished boundary
  int pending_boundary_ = -1; // trained but boundary not yet processed
};

// run_id is a deterministic digest of config and dataset; no timestamps so
// equal runs produce byte-equal files.
std::string run_id_for(const RunConfig& cfg, uint64_t dataset_checksum);

}  // namespace lml
