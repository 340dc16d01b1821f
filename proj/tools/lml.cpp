#include <CLI11.hpp>

#include "lml/cli.hpp"

// Subcommands:
//   lml gen     write a synthetic dataset file
//   lml run     train over a stream and write results/checkpoints
//   lml report  merge run results into a comparison table
int main(int argc, char** argv) {
  CLI::App app{"class-incremental multi-label training engine"};
  app.require_subcommand(1);

  lml::GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a synthetic dataset file");
  gen_cmd->add_option("--tasks", gen.synthetic.num_tasks, "number of tasks");
  gen_cmd->add_option("--classes-per-task", gen.synthetic.classes_per_task,
                      "new classes per task");
  gen_cmd->add_option("--feature-dim", gen.synthetic.feature_dim, "feature vector width");
  gen_cmd->add_option("--train-per-task", gen.synthetic.train_per_task,
                      "training examples per task");
  gen_cmd->add_option("--test-per-task", gen.synthetic.test_per_task,
                      "test examples per task");
  gen_cmd->add_option("--cooc", gen.synthetic.cooccurrence_strength,
                      "co-occurrence strength in [0,1]");
  gen_cmd->add_option("--noise", gen.synthetic.noise_std, "feature noise stddev");
  gen_cmd->add_option("--seed", gen.synthetic.seed, "generation seed");
  gen_cmd->add_option("--out", gen.out, "output path")->required();

  lml::RunOptions run;
  double l1 = 0, l2 = 0, l3 = 0, lr = 0;
  int batch = 0;
  uint64_t seed = 0;
  int s_tasks = 0, s_cpt = 0, s_dim = 0, s_train = 0, s_test = 0;
  double s_cooc = 0, s_noise = 0;
  CLI::App* run_cmd = app.add_subcommand("run", "run the training protocol");
  run_cmd->add_option("--data", run.data, "dataset file path");
  run_cmd->add_flag("--synthetic", run.synthetic, "use the built-in synthetic stream");
  auto* o_tasks = run_cmd->add_option("--tasks", s_tasks, "synthetic: number of tasks");
  auto* o_cpt =
      run_cmd->add_option("--classes-per-task", s_cpt, "synthetic: new classes per task");
  auto* o_dim = run_cmd->add_option("--feature-dim", s_dim, "synthetic: feature width");
  auto* o_train =
      run_cmd->add_option("--train-per-task", s_train, "synthetic: train examples per task");
  auto* o_test =
      run_cmd->add_option("--test-per-task", s_test, "synthetic: test examples per task");
  auto* o_cooc = run_cmd->add_option("--cooc", s_cooc, "synthetic: co-occurrence strength");
  auto* o_noise = run_cmd->add_option("--noise", s_noise, "synthetic: feature noise stddev");
  run_cmd->add_option("--preset", run.preset, "experiment preset");
  auto* o_l1 = run_cmd->add_option("--lambda1", l1, "classification loss weight");
  auto* o_l2 = run_cmd->add_option("--lambda2", l2, "distillation loss weight");
  auto* o_l3 = run_cmd->add_option("--lambda3", l3, "graph preservation loss weight");
  auto* o_lr = run_cmd->add_option("--lr", lr, "learning rate");
  auto* o_batch = run_cmd->add_option("--batch", batch, "mini-batch size");
  auto* o_seed = run_cmd->add_option("--seed", seed, "run seed (also seeds synthetic data)");
  run_cmd->add_flag("--ablate-inter-task", run.ablate_inter_task,
                    "zero the inter-task correlation blocks");
  run_cmd->add_flag("--resume", run.resume, "continue from the latest checkpoint");
  run_cmd->add_option("--out", run.out, "output directory")->required();

  lml::ReportOptions report;
  CLI::App* report_cmd = app.add_subcommand("report", "merge runs into a comparison table");
  report_cmd->add_option("--in", report.inputs, "run directories or results files")
      ->required()
      ->expected(-1);
  report_cmd->add_option("--out", report.out_prefix, "output path prefix")->required();
  report_cmd->add_option("--display-threshold", report.display_threshold,
                         "label listing threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Flag/usage problems are configuration errors.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (gen_cmd->parsed()) return lml::cmd_gen(gen);
  if (run_cmd->parsed()) {
    if (*o_l1) run.lambda1 = l1;
    if (*o_l2) run.lambda2 = l2;
    if (*o_l3) run.lambda3 = l3;
    if (*o_lr) run.lr = lr;
    if (*o_batch) run.batch = batch;
    if (*o_seed) run.seed = seed;
    if (*o_tasks) run.tasks = s_tasks;
    if (*o_cpt) run.classes_per_task = s_cpt;
    if (*o_dim) run.feature_dim = s_dim;
    if (*o_train) run.train_per_task = s_train;
    if (*o_test) run.test_per_task = s_test;
    if (*o_cooc) run.cooc = s_cooc;
    if (*o_noise) run.noise = s_noise;
    return lml::cmd_run(run);
  }
  return lml::cmd_report(report);
}
