#include "lml/cli.hpp"

#include <cstdio>
#include <filesystem>

#include "lml/errors.hpp"
#include "lml/log.hpp"
#include "lml/presets.hpp"

namespace fs = std::filesystem;

namespace lml {

int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const ConfigError& e) {
    log_error("%s", e.what());
    return 2;
  } catch (const FormatError& e) {
    log_error("%s", e.what());
    return 3;
  } catch (const NumericError& e) {
    log_error("%s", e.what());
    return 4;
  } catch (const std::exception& e) {
    log_error("%s", e.what());
    return 1;
  }
}

namespace {

void print_task_stats(const TaskStream& stream) {
  for (int t = 0; t < stream.num_tasks(); ++t) {
    const auto& task = stream.tasks[static_cast<size_t>(t)];
    uint64_t positives = 0;
    uint64_t cells = 0;
    for (const auto& ex : task.train) {
      for (uint8_t l : ex.labels) positives += l;
      cells += ex.labels.size();
    }
    const double density = cells > 0 ? static_cast<double>(positives) / static_cast<double>(cells) : 0.0;
    std::printf("task %d: classes [%s..%s] train %zu test %zu label-density %.4f\n", t + 1,
                stream.labels.names()[static_cast<size_t>(stream.labels.task_begin(t))].c_str(),
                stream.labels.names()[static_cast<size_t>(stream.labels.task_end(t) - 1)].c_str(),
                task.train.size(), task.test.size(), density);
  }
}

int run_single(RunConfig cfg, const TaskStream& stream) {
  Trainer trainer(std::move(cfg), stream);
  const RunResult result = trainer.run();
  const BoundaryReport& last = result.final_boundary();
  std::printf("run %s preset %s\n", result.run_id.c_str(), trainer.config().preset.c_str());
  std::printf("final mAP %.2f CF1 %.2f OF1 %.2f\n", last.aggregate.map, last.aggregate.cf1,
              last.aggregate.of1);
  if (last.forget) {
    std::printf("forgetting mAP %.2f CF1 %.2f OF1 %.2f\n", last.forget->map,
                last.forget->cf1, last.forget->of1);
  }
  return 0;
}

}  // namespace

int cmd_gen(const GenOptions& opt) {
  try {
    if (opt.out.empty()) throw ConfigError("gen: out path is required");
    const TaskStream stream = generate_synthetic(opt.synthetic);
    save_dataset(stream, opt.out);
    std::printf("wrote %s\n", opt.out.c_str());
    std::printf("checksum %016llx\n",
                static_cast<unsigned long long>(dataset_checksum(stream)));
    print_task_stats(stream);
    return 0;
  } catch (...) {
    return exit_code_for_current_exception();
  }
}

int cmd_run(const RunOptions& opt) {
  try {
    if (opt.data.empty() && !opt.synthetic) {
      throw ConfigError("run: pass a dataset path or synthetic mode");
    }
    if (!opt.data.empty() && opt.synthetic) {
      throw ConfigError("run: dataset path and synthetic mode are mutually exclusive");
    }
    if (opt.out.empty()) throw ConfigError("run: out directory is required");

    RunConfig cfg;
    const bool grid = is_grid_preset(opt.preset);
    if (!grid) apply_preset(cfg, opt.preset);
    cfg.data_path = opt.data;
    if (opt.tasks) cfg.synthetic.num_tasks = *opt.tasks;
    if (opt.classes_per_task) cfg.synthetic.classes_per_task = *opt.classes_per_task;
    if (opt.feature_dim) cfg.synthetic.feature_dim = *opt.feature_dim;
    if (opt.train_per_task) cfg.synthetic.train_per_task = *opt.train_per_task;
    if (opt.test_per_task) cfg.synthetic.test_per_task = *opt.test_per_task;
    if (opt.cooc) cfg.synthetic.cooccurrence_strength = *opt.cooc;
    if (opt.noise) cfg.synthetic.noise_std = *opt.noise;
    if (opt.seed) {
      cfg.seed = *opt.seed;
      cfg.synthetic.seed = *opt.seed;
    }
    if (opt.lambda1) cfg.weights.cls = *opt.lambda1;
    if (opt.lambda2) cfg.weights.dst = *opt.lambda2;
    if (opt.lambda3) cfg.weights.gph = *opt.lambda3;
    if (opt.lr) cfg.lr = *opt.lr;
    if (opt.batch) cfg.batch_size = *opt.batch;
    if (opt.ablate_inter_task) cfg.ablate_inter_task = true;
    cfg.resume = opt.resume;

    const TaskStream stream =
        opt.data.empty() ? generate_synthetic(cfg.synthetic) : load_dataset(opt.data);

    if (!grid) {
      cfg.out_dir = opt.out;
      return run_single(std::move(cfg), stream);
    }
    cfg.preset = opt.preset;
    int rc = 0;
    for (RunConfig& sub : expand_grid(cfg)) {
      sub.out_dir = (fs::path(opt.out) / sub.preset).string();
      const int code = run_single(std::move(sub), stream);
      rc = rc == 0 ? code : rc;
    }
    return rc;
  } catch (...) {
    return exit_code_for_current_exception();
  }
}

int cmd_report(const ReportOptions& opt) {
  try {
    write_report(opt);
    std::printf("wrote %s.txt, %s.csv, %s_series.csv\n", opt.out_prefix.c_str(),
                opt.out_prefix.c_str(), opt.out_prefix.c_str());
    return 0;
  } catch (...) {
    return exit_code_for_current_exception();
  }
}

}  // namespace lml
