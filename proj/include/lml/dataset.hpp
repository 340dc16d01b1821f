#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lml/matrix.hpp"

namespace lml {

// One labeled feature vector. `labels` is the full ground truth over every
// generated class and is reserved for evaluation; training only ever sees
// the partial projection onto the current task's classes.
struct Example {
  std::vector<float> features;
  std::vector<uint8_t> labels;  // 0/1 per global class
};

// Global class bookkeeping: classes are ordered by task, then by position
// within the task, and an index never changes once assigned.
class LabelSpace {
 public:
  LabelSpace() = default;

  // Appends one task's classes; throws ConfigError on duplicate names or
  // empty task class sets.
  void add_task(const std::vector<std::string>& names);

  int num_tasks() const { return static_cast<int>(task_end_.size()); }
  int num_classes() const { return task_end_.empty() ? 0 : task_end_.back(); }

  // [begin, end) global index range of task t (0-based).
  int task_begin(int t) const { return t == 0 ? 0 : task_end_[t - 1]; }
  int task_end(int t) const { return task_end_[t]; }
  int task_size(int t) const { return task_end(t) - task_begin(t); }

  // |C_seen| after task t (0-based) has been introduced.
  int seen_after(int t) const { return task_end_[t]; }

  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::vector<int> task_end_;
};

struct Task {
  std::vector<Example> train;
  std::vector<Example> test;
};

struct TaskStream {
  LabelSpace labels;
  int feature_dim = 0;
  uint64_t seed = 0;  // generation seed; 0 when loaded from file
  std::vector<Task> tasks;
  // Pairwise affinity used by the synthetic sampler; empty for loaded
  // streams. Kept so co-occurrence recovery can be tested against it.
  Mat affinity;

  int num_tasks() const { return static_cast<int>(tasks.size()); }
  int num_classes() const { return labels.num_classes(); }
};

struct SyntheticConfig {
  int num_tasks = 10;
  int classes_per_task = 4;
  int feature_dim = 64;
  int train_per_task = 200;
  int test_per_task = 50;
  double cooccurrence_strength = 0.7;
  double noise_std = 0.1;
  uint64_t seed = 1;
};

// Every non-anchor class joins a label set with this probability floor; the
// affinity term adds on top of it.
inline constexpr double kBaseLabelRate = 0.05;

// Samples a class-incremental multi-label stream. Per example: one anchor
// class drawn uniformly from its task, every other class included with
// probability base_rate + strength * affinity(anchor, other), features are
// the sum of unit-norm class prototypes plus Gaussian noise. Deterministic:
// equal config implies a bit-identical stream.
TaskStream generate_synthetic(const SyntheticConfig& cfg);

// Training view: labels restricted to task t's classes. Old-task and
// future-task ground truth is not visible through this call.
Vec project_partial(const Example& ex, const LabelSpace& labels, int task_index);

// Batch helpers. Features widen to double; labels are the partial view.
Mat batch_features(const std::vector<Example>& examples, int begin, int count);
Mat batch_task_labels(const std::vector<Example>& examples, int begin, int count,
                      const LabelSpace& labels, int task_index);
// Ground-truth matrix over the first `num_cols` global classes.
Mat full_label_matrix(const std::vector<Example>& examples, int num_cols);

// Binary dataset file format ("LMLD"). All integers little-endian.
void save_dataset(const TaskStream& stream, const std::string& path);
TaskStream load_dataset(const std::string& path);

// Serialized byte image of the stream (exactly what save_dataset writes).
std::vector<uint8_t> serialize_dataset(const TaskStream& stream);
uint64_t dataset_checksum(const TaskStream& stream);

}  // namespace lml
