#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "lml/errors.hpp"
#include "lml/trainer.hpp"

using namespace lml;
namespace fs = std::filesystem;

namespace {

SyntheticConfig tiny_stream_config() {
  SyntheticConfig cfg;
  cfg.num_tasks = 3;
  cfg.classes_per_task = 2;
  cfg.feature_dim = 8;
  cfg.train_per_task = 40;
  cfg.test_per_task = 12;
  cfg.cooccurrence_strength = 0.7;
  cfg.noise_std = 0.1;
  cfg.seed = 2;
  return cfg;
}

RunConfig tiny_run_config() {
  RunConfig cfg;
  cfg.synthetic = tiny_stream_config();
  cfg.batch_size = 8;
  cfg.seed = 11;
  cfg.weights = {0.07, 0.93, 100.0};
  cfg.backbone_hidden = 16;
  cfg.embed_dim = 8;
  cfg.gcn_hidden = 8;
  cfg.repr_dim = 8;
  return cfg;
}

uint64_t params_checksum(const Trainer& t) { return t.params().checksum(); }

}  // namespace

TEST_CASE("single pass: every train example is consumed exactly once") {
  const TaskStream stream = generate_synthetic(tiny_stream_config());
  Trainer trainer(tiny_run_config(), stream);
  const RunResult result = trainer.run();

  uint64_t expected = 0;
  for (const auto& task : stream.tasks) expected += task.train.size();
  CHECK(result.audit.train_examples_seen == expected);
  CHECK(result.audit.label_width_violations == 0);
  CHECK(result.boundaries.size() == 3);
}

TEST_CASE("expert snapshots never move during training") {
  const TaskStream stream = generate_synthetic(tiny_stream_config());
  Trainer trainer(tiny_run_config(), stream);
  const RunResult result = trainer.run();
  CHECK(result.audit.expert_checks > 0);
  CHECK(result.audit.expert_violations == 0);
}

TEST_CASE("boundary rotates the expert to the just-trained model") {
  const TaskStream stream = generate_synthetic(tiny_stream_config());
  Trainer trainer(tiny_run_config(), stream);
  trainer.train_task(0);

  // Live scores right before the boundary.
  const Mat adj = trainer.current_adjacency();
  const auto& probe = stream.tasks[1].test;
  const Mat features = batch_features(probe, 0, 5);
  const Mat live = predict(adj, trainer.embeddings().rows(), features, trainer.params());
  const Mat frozen_corr = trainer.cooc().assemble();

  trainer.task_boundary(0);
  REQUIRE(trainer.expert().has_value());
  CHECK(trainer.expert()->soft_labels(features) == live);
  CHECK(trainer.expert()->correlation() == frozen_corr);
  // The frozen old-old block of the next task equals the boundary matrix.
  CHECK(trainer.cooc().frozen_old() == frozen_corr);
}

TEST_CASE("protocol misuse is rejected") {
  const TaskStream stream = generate_synthetic(tiny_stream_config());
  Trainer trainer(tiny_run_config(), stream);
  CHECK_THROWS_AS(trainer.task_boundary(0), ProtocolError);
  trainer.train_task(0);
  CHECK_THROWS_AS(trainer.train_task(0), ProtocolError);  // boundary pending
  CHECK_THROWS_AS(trainer.train_task(1), ProtocolError);
  trainer.task_boundary(0);
  CHECK_THROWS_AS(trainer.train_task(0), ProtocolError);  // already completed
  CHECK_THROWS_AS(trainer.task_boundary(1), ProtocolError);
}

TEST_CASE("ablation zeroes the inter-task blocks throughout") {
  const TaskStream stream = generate_synthetic(tiny_stream_config());
  RunConfig cfg = tiny_run_config();
  cfg.ablate_inter_task = true;
  Trainer trainer(cfg, stream);
  trainer.train_task(0);
  trainer.task_boundary(0);
  trainer.train_task(1);

  const Mat a = trainer.cooc().assemble(true);
  const int n_old = trainer.cooc().old_count();
  const int n_new = trainer.cooc().new_count();
  CHECK(a.topRightCorner(n_old, n_new) == Mat::Zero(n_old, n_new));
  CHECK(a.bottomLeftCorner(n_new, n_old) == Mat::Zero(n_new, n_old));
}

TEST_CASE("metrics are cached exactly once per task for forgetting") {
  const TaskStream stream = generate_synthetic(tiny_stream_config());
  Trainer trainer(tiny_run_config(), stream);
  const RunResult result = trainer.run();
  CHECK_FALSE(result.boundaries[0].forget.has_value());
  REQUIRE(result.boundaries[1].forget.has_value());
  REQUIRE(result.boundaries[2].forget.has_value());
  CHECK(result.boundaries[1].per_task.size() == 2);
  CHECK(result.boundaries[2].per_task.size() == 3);
}

TEST_CASE("fixed seeds give identical runs") {
  const TaskStream stream = generate_synthetic(tiny_stream_config());
  Trainer a(tiny_run_config(), stream);
  Trainer b(tiny_run_config(), stream);
  const RunResult ra = a.run();
  const RunResult rb = b.run();
  CHECK(params_checksum(a) == params_checksum(b));
  CHECK(ra.run_id == rb.run_id);
  for (size_t i = 0; i < ra.boundaries.size(); ++i) {
    CHECK(ra.boundaries[i].aggregate.map == rb.boundaries[i].aggregate.map);
    CHECK(ra.boundaries[i].aggregate.of1 == rb.boundaries[i].aggregate.of1);
  }

  RunConfig other = tiny_run_config();
  other.seed = 12;
  Trainer c(other, stream);
  c.run();
  CHECK(params_checksum(a) != params_checksum(c));
}

TEST_CASE("old-class ground truth in train data is never read") {
  const TaskStream stream = generate_synthetic(tiny_stream_config());

  // Scramble old-class and future-class bits of the training labels; only
  // the current task's slice is visible to the trainer, so nothing changes.
  TaskStream corrupted = stream;
  for (int t = 0; t < corrupted.num_tasks(); ++t) {
    const int begin = corrupted.labels.task_begin(t);
    const int end = corrupted.labels.task_end(t);
    uint8_t flip = 0;
    for (auto& ex : corrupted.tasks[t].train) {
      for (int c = 0; c < corrupted.num_classes(); ++c) {
        if (c < begin || c >= end) ex.labels[c] = (flip++ % 3) == 0 ? 1 : 0;
      }
    }
  }

  Trainer a(tiny_run_config(), stream);
  Trainer b(tiny_run_config(), corrupted);
  a.run();
  b.run();
  CHECK(params_checksum(a) == params_checksum(b));
}

TEST_CASE("checkpoints allow resuming at the next task") {
  const TaskStream stream = generate_synthetic(tiny_stream_config());
  const fs::path dir = fs::temp_directory_path() / "lml_trainer_resume";
  fs::remove_all(dir);

  // Uninterrupted reference run (no file output).
  Trainer full(tiny_run_config(), stream);
  const RunResult want = full.run();

  // Interrupted run: two of three tasks, then a fresh trainer resumes.
  {
    RunConfig cfg = tiny_run_config();
    cfg.out_dir = dir.string();
    Trainer partial(cfg, stream);
    partial.train_task(0);
    partial.task_boundary(0);
    partial.train_task(1);
    partial.task_boundary(1);
  }
  RunConfig cfg = tiny_run_config();
  cfg.out_dir = dir.string();
  cfg.resume = true;
  Trainer resumed(cfg, stream);
  const RunResult got = resumed.run();

  CHECK(resumed.completed_tasks() == 2);
  CHECK(params_checksum(resumed) == params_checksum(full));
  CHECK(got.boundaries.size() == want.boundaries.size());
  for (size_t i = 0; i < want.boundaries.size(); ++i) {
    CHECK(got.boundaries[i].aggregate.map == want.boundaries[i].aggregate.map);
  }
  CHECK(got.audit.train_examples_seen == want.audit.train_examples_seen);

  // Resuming against a different dataset is refused.
  SyntheticConfig other_stream = tiny_stream_config();
  other_stream.seed = 77;
  const TaskStream mismatched = generate_synthetic(other_stream);
  RunConfig bad = cfg;
  Trainer t(bad, mismatched);
  CHECK_THROWS_AS(t.run(), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("config validation names the offending field") {
  const TaskStream stream = generate_synthetic(tiny_stream_config());
  RunConfig cfg = tiny_run_config();
  cfg.batch_size = 0;
  CHECK_THROWS_WITH_AS(Trainer(cfg, stream).run(), doctest::Contains("batch"), ConfigError);
  cfg = tiny_run_config();
  cfg.weights.dst = -1.0;
  CHECK_THROWS_WITH_AS(Trainer(cfg, stream).run(), doctest::Contains("lambda2"), ConfigError);
  cfg = tiny_run_config();
  cfg.lr = 0.0;
  CHECK_THROWS_WITH_AS(Trainer(cfg, stream).run(), doctest::Contains("lr"), ConfigError);
}

TEST_CASE("config json round trip") {
  RunConfig cfg = tiny_run_config();
  cfg.preset = "fine-tuning";
  cfg.weights = {1.0, 0.0, 0.0};
  cfg.ablate_inter_task = true;
  const RunConfig back = RunConfig::from_json(cfg.to_json());
  CHECK(back.preset == cfg.preset);
  CHECK(back.weights.cls == cfg.weights.cls);
  CHECK(back.weights.dst == cfg.weights.dst);
  CHECK(back.synthetic.seed == cfg.synthetic.seed);
  CHECK(back.batch_size == cfg.batch_size);
  CHECK(back.ablate_inter_task == cfg.ablate_inter_task);
  CHECK(back.to_json() == cfg.to_json());
}
