#include "lml/trainer.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lml/errors.hpp"
#include "lml/log.hpp"
#include "lml/report.hpp"
#include "lml/rng.hpp"
#include "lml/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lml {

namespace {

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json metric_values_json(const MetricValues& v) {
  return json{{"map", v.map}, {"cf1", v.cf1}, {"of1", v.of1}};
}

MetricValues metric_values_from(const json& j) {
  MetricValues v;
  v.map = j.at("map").get<double>();
  v.cf1 = j.at("cf1").get<double>();
  v.of1 = j.at("of1").get<double>();
  return v;
}

json forgetting_json(const ForgettingValues& v) {
  return json{{"map", v.map}, {"cf1", v.cf1}, {"of1", v.of1}};
}

ForgettingValues forgetting_from(const json& j) {
  ForgettingValues v;
  v.map = j.at("map").get<double>();
  v.cf1 = j.at("cf1").get<double>();
  v.of1 = j.at("of1").get<double>();
  return v;
}

}  // namespace

void RunConfig::validate() const {
  weights.validate();
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must lie in [0, 1)");
  if (grad_clip < 0.0) throw ConfigError("grad_clip must be non-negative");
  if (batch_size < 1) throw ConfigError("batch must be >= 1");
  if (backbone_hidden < 1) throw ConfigError("backbone_hidden must be >= 1");
  if (embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
  if (gcn_hidden < 1) throw ConfigError("gcn_hidden must be >= 1");
  if (repr_dim < 1) throw ConfigError("repr_dim must be >= 1");
  if (!(f1_threshold > 0.0 && f1_threshold < 1.0)) {
    throw ConfigError("f1_threshold must lie in (0, 1)");
  }
  if (!(display_threshold > 0.0 && display_threshold < 1.0)) {
    throw ConfigError("display_threshold must lie in (0, 1)");
  }
  if (preset.empty()) throw ConfigError("preset must not be empty");
  if (data_path.empty()) {
    if (synthetic.num_tasks < 1 || synthetic.classes_per_task < 1 ||
        synthetic.feature_dim < 1 || synthetic.train_per_task < 1 ||
        synthetic.test_per_task < 1) {
      throw ConfigError("synthetic counts must be >= 1");
    }
    if (synthetic.cooccurrence_strength < 0.0 || synthetic.cooccurrence_strength > 1.0) {
      throw ConfigError("cooc must lie in [0, 1]");
    }
    if (!(synthetic.noise_std >= 0.0)) throw ConfigError("noise must be non-negative");
  }
}

// out_dir and resume are placement/mode, not experiment identity; leaving
// them out keeps result files byte-identical across output locations.
std::string RunConfig::to_json() const {
  json j;
  j["schema"] = kResultsSchemaVersion;
  j["data_path"] = data_path;
  j["synthetic"] = {{"num_tasks", synthetic.num_tasks},
                    {"classes_per_task", synthetic.classes_per_task},
                    {"feature_dim", synthetic.feature_dim},
                    {"train_per_task", synthetic.train_per_task},
                    {"test_per_task", synthetic.test_per_task},
                    {"cooccurrence_strength", synthetic.cooccurrence_strength},
                    {"noise_std", synthetic.noise_std},
                    {"seed", std::to_string(synthetic.seed)}};
  j["preset"] = preset;
  j["lambda1"] = weights.cls;
  j["lambda2"] = weights.dst;
  j["lambda3"] = weights.gph;
  j["dst_batch_mean"] = loss_options.dst_batch_mean;
  j["gph_row_mean"] = loss_options.gph_row_mean;
  j["clamp_eps"] = loss_options.clamp_eps;
  j["lr"] = lr;
  j["momentum"] = momentum;
  j["grad_clip"] = grad_clip;
  j["batch"] = batch_size;
  j["seed"] = std::to_string(seed);
  j["backbone_hidden"] = backbone_hidden;
  j["embed_dim"] = embed_dim;
  j["gcn_hidden"] = gcn_hidden;
  j["repr_dim"] = repr_dim;
  j["f1_threshold"] = f1_threshold;
  j["display_threshold"] = display_threshold;
  j["ablate_inter_task"] = ablate_inter_task;
  return j.dump();
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  RunConfig c;
  c.data_path = j.value("data_path", std::string());
  if (j.contains("synthetic")) {
    const json& s = j["synthetic"];
    c.synthetic.num_tasks = s.value("num_tasks", c.synthetic.num_tasks);
    c.synthetic.classes_per_task = s.value("classes_per_task", c.synthetic.classes_per_task);
    c.synthetic.feature_dim = s.value("feature_dim", c.synthetic.feature_dim);
    c.synthetic.train_per_task = s.value("train_per_task", c.synthetic.train_per_task);
    c.synthetic.test_per_task = s.value("test_per_task", c.synthetic.test_per_task);
    c.synthetic.cooccurrence_strength =
        s.value("cooccurrence_strength", c.synthetic.cooccurrence_strength);
    c.synthetic.noise_std = s.value("noise_std", c.synthetic.noise_std);
    c.synthetic.seed = std::stoull(s.value("seed", std::string("1")));
  }
  c.preset = j.value("preset", c.preset);
  c.weights.cls = j.value("lambda1", c.weights.cls);
  c.weights.dst = j.value("lambda2", c.weights.dst);
  c.weights.gph = j.value("lambda3", c.weights.gph);
  c.loss_options.dst_batch_mean = j.value("dst_batch_mean", c.loss_options.dst_batch_mean);
  c.loss_options.gph_row_mean = j.value("gph_row_mean", c.loss_options.gph_row_mean);
  c.loss_options.clamp_eps = j.value("clamp_eps", c.loss_options.clamp_eps);
  c.lr = j.value("lr", c.lr);
  c.momentum = j.value("momentum", c.momentum);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.batch_size = j.value("batch", c.batch_size);
  c.seed = std::stoull(j.value("seed", std::string("1")));
  c.backbone_hidden = j.value("backbone_hidden", c.backbone_hidden);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.gcn_hidden = j.value("gcn_hidden", c.gcn_hidden);
  c.repr_dim = j.value("repr_dim", c.repr_dim);
  c.f1_threshold = j.value("f1_threshold", c.f1_threshold);
  c.display_threshold = j.value("display_threshold", c.display_threshold);
  c.ablate_inter_task = j.value("ablate_inter_task", c.ablate_inter_task);
  return c;
}

std::string run_id_for(const RunConfig& cfg, uint64_t dataset_checksum) {
  const std::string cj = cfg.to_json();
  uint64_t h = fnv1a(cj.data(), cj.size());
  h = fnv1a(&dataset_checksum, sizeof(dataset_checksum), h);
  return hex64(h);
}

Trainer::Trainer(RunConfig cfg, const TaskStream& stream)
    : cfg_(std::move(cfg)),
      stream_(stream),
      h0_(cfg_.embed_dim, mix_seed(cfg_.seed, 0x48305f5f)) {
  cfg_.validate();
  if (stream_.num_tasks() < 1) throw ConfigError("task stream is empty");
  ModelDims dims;
  dims.feature_dim = stream_.feature_dim;
  dims.backbone_hidden = cfg_.backbone_hidden;
  dims.embed_dim = cfg_.embed_dim;
  dims.gcn_hidden = cfg_.gcn_hidden;
  dims.repr_dim = cfg_.repr_dim;
  params_ = ModelParams::init(dims, cfg_.seed);
  for (Mat* t : params_.tensors()) velocity_.push_back(Mat::Zero(t->rows(), t->cols()));

  std::vector<std::string> first_names(
      stream_.labels.names().begin(),
      stream_.labels.names().begin() + stream_.labels.task_end(0));
  h0_.grow(first_names);
  cooc_.emplace(Mat(0, 0), stream_.labels.task_size(0));
}

Mat Trainer::current_adjacency() const {
  return row_normalize(cooc_->assemble(cfg_.ablate_inter_task));
}

Mat Trainer::score_test(const Mat& features, const Mat& adj) const {
  return predict(adj, h0_.rows(), features, params_);
}

void Trainer::apply_gradients(const std::vector<Mat>& grads) {
  auto tensors = params_.tensors();
  for (size_t i = 0; i < tensors.size(); ++i) {
    Mat g = grads[i];
    const double norm = g.norm();
    if (cfg_.grad_clip > 0.0 && norm > cfg_.grad_clip) g *= cfg_.grad_clip / norm;
    velocity_[i] = cfg_.momentum * velocity_[i] + g;
    *tensors[i] -= cfg_.lr * velocity_[i];
    require_finite(*tensors[i], "optimizer step");
  }
}

void Trainer::train_task(int t) {
  if (pending_boundary_ != -1) {
    throw ProtocolError("train_task: boundary for task " +
                        std::to_string(pending_boundary_ + 1) + " still pending");
  }
  if (t != completed_ + 1) {
    throw ProtocolError("train_task: task " + std::to_string(t + 1) +
                        " out of order (completed " + std::to_string(completed_ + 1) + ")");
  }
  if (t >= stream_.num_tasks()) throw ConfigError("train_task: no such task");

  const auto& train = stream_.tasks[static_cast<size_t>(t)].train;
  const int n = static_cast<int>(train.size());
  const int task_size = stream_.labels.task_size(t);
  const int old_count = stream_.labels.seen_after(t) - task_size;
  log_debug("task %d: %d train examples, %d old classes", t + 1, n, old_count);

  for (int begin = 0; begin < n; begin += cfg_.batch_size) {
    const int count = std::min(cfg_.batch_size, n - begin);
    const Mat features = batch_features(train, begin, count);
    const Mat labels = batch_task_labels(train, begin, count, stream_.labels, t);
    if (labels.cols() != task_size) ++audit_.label_width_violations;

    Mat soft;
    if (expert_) soft = expert_->soft_labels(features);

    // Statistics first, then the forward pass sees the freshest graph.
    cooc_->update_hard(labels);
    if (expert_) cooc_->update_soft(soft, labels);
    const Mat adj = current_adjacency();

    PredictGraph graph = predict_graph(adj, h0_.rows(), features, params_);
    NodePtr loss =
        total_loss(labels, graph.scores, soft, expert_ ? expert_->stored_graph() : Mat(),
                   graph.graph_repr, old_count, cfg_.weights, cfg_.loss_options);
    backward(loss);

    std::vector<Mat> grads;
    grads.reserve(4);
    for (const NodePtr& leaf : graph.leaves()) grads.push_back(leaf->grad);
    apply_gradients(grads);

    audit_.train_examples_seen += static_cast<uint64_t>(count);
    ++audit_.train_batches;
    if (expert_) {
      ++audit_.expert_checks;
      if (expert_->state_checksum() != expert_checksum_) ++audit_.expert_violations;
    }
  }
  pending_boundary_ = t;
}

void Trainer::task_boundary(int t) {
  if (pending_boundary_ != t) {
    throw ProtocolError("task_boundary: task " + std::to_string(t + 1) + " not trained yet");
  }

  const Mat frozen = cooc_->assemble(cfg_.ablate_inter_task);
  const Mat adj = row_normalize(frozen);

  BoundaryReport report = evaluate_seen(
      [&](const Mat& f) { return score_test(f, adj); }, stream_, t, cfg_.f1_threshold,
      first_trained_, past_aggregates_);
  first_trained_.push_back(report.per_task[static_cast<size_t>(t)]);
  past_aggregates_.push_back(report.aggregate);
  boundaries_.push_back(report);
  log_info("task %d/%d: mAP %.2f CF1 %.2f OF1 %.2f%s", t + 1, stream_.num_tasks(),
           report.aggregate.map, report.aggregate.cf1, report.aggregate.of1,
           report.forget ? "" : " (no forgetting yet)");

  expert_.emplace(params_, frozen, h0_.rows());
  expert_checksum_ = expert_->state_checksum();

  if (t == stream_.num_tasks() - 1) collect_samples(adj);

  if (t + 1 < stream_.num_tasks()) {
    std::vector<std::string> next_names(
        stream_.labels.names().begin() + stream_.labels.task_begin(t + 1),
        stream_.labels.names().begin() + stream_.labels.task_end(t + 1));
    h0_.grow(next_names);
    cooc_.emplace(frozen, stream_.labels.task_size(t + 1));
  }

  completed_ = t;
  pending_boundary_ = -1;
  write_boundary_files(t, frozen);
}

void Trainer::collect_samples(const Mat& adj) {
  const auto& test = stream_.tasks[0].test;
  const int count = std::min<int>(8, static_cast<int>(test.size()));
  if (count == 0) return;
  const Mat features = batch_features(test, 0, count);
  const Mat scores = score_test(features, adj);
  const int seen = static_cast<int>(scores.cols());
  for (int i = 0; i < count; ++i) {
    SampleScores s;
    s.example = i;
    for (int c = 0; c < seen; ++c) {
      if (test[static_cast<size_t>(i)].labels[static_cast<size_t>(c)]) s.true_ids.push_back(c);
      s.scores.push_back(scores(i, c));
    }
    samples_.push_back(std::move(s));
  }
}

void Trainer::write_boundary_files(int t, const Mat& frozen) {
  if (cfg_.out_dir.empty()) return;
  const fs::path out(cfg_.out_dir);
  fs::create_directories(out);

  const int seen = stream_.labels.seen_after(t);
  std::vector<std::string> names(stream_.labels.names().begin(),
                                 stream_.labels.names().begin() + seen);
  write_matrix_csv((out / ("acm_t" + std::to_string(t + 1) + ".csv")).string(), names, frozen);

  const fs::path ckpt = out / ("checkpoint_t" + std::to_string(t + 1));
  fs::create_directories(ckpt);

  NamedTensors model;
  auto tensors = params_.tensors();
  const auto& tnames = ModelParams::tensor_names();
  for (size_t i = 0; i < tensors.size(); ++i) model.emplace_back(tnames[i], *tensors[i]);
  for (size_t i = 0; i < velocity_.size(); ++i) model.emplace_back("vel_" + tnames[i], velocity_[i]);
  model.emplace_back("h0", h0_.rows());
  save_tensors((ckpt / "model.lmlw").string(), model);

  NamedTensors xpt;
  auto xtensors = expert_->params().tensors();
  for (size_t i = 0; i < xtensors.size(); ++i) xpt.emplace_back("xpt_" + tnames[i], *xtensors[i]);
  xpt.emplace_back("corr", expert_->correlation());
  xpt.emplace_back("h0", expert_->embeddings());
  xpt.emplace_back("graph", expert_->stored_graph());
  save_tensors((ckpt / "expert.lmlw").string(), xpt);

  write_matrix_csv((ckpt / "acm.csv").string(), names, frozen);

  json state;
  state["schema"] = kResultsSchemaVersion;
  state["completed"] = t + 1;
  state["run_id"] = run_id_for(cfg_, dataset_checksum(stream_));
  state["dataset_checksum"] = hex64(dataset_checksum(stream_));
  state["config"] = json::parse(cfg_.to_json());
  json ft = json::array();
  for (const auto& v : first_trained_) ft.push_back(metric_values_json(v));
  state["first_trained"] = ft;
  json pa = json::array();
  for (const auto& v : past_aggregates_) pa.push_back(metric_values_json(v));
  state["past_aggregates"] = pa;
  json bs = json::array();
  for (const auto& b : boundaries_) {
    json jb;
    jb["t"] = b.t + 1;
    jb["aggregate"] = metric_values_json(b.aggregate);
    json pt = json::array();
    for (const auto& v : b.per_task) pt.push_back(metric_values_json(v));
    jb["per_task"] = pt;
    jb["forget"] = b.forget ? forgetting_json(*b.forget) : json(nullptr);
    jb["forget_aggregate"] =
        b.forget_aggregate ? forgetting_json(*b.forget_aggregate) : json(nullptr);
    bs.push_back(jb);
  }
  state["boundaries"] = bs;
  state["audit"] = {{"train_examples_seen", audit_.train_examples_seen},
                    {"train_batches", audit_.train_batches},
                    {"expert_checks", audit_.expert_checks},
                    {"expert_violations", audit_.expert_violations},
                    {"label_width_violations", audit_.label_width_violations}};
  std::ofstream sf(ckpt / "state.json", std::ios::trunc);
  sf << state.dump(2) << "\n";
  if (!sf) throw FormatError("short write to state.json");
}

bool Trainer::try_resume() {
  const fs::path out(cfg_.out_dir);
  int latest = -1;
  for (int t = stream_.num_tasks() - 1; t >= 0; --t) {
    const fs::path ckpt = out / ("checkpoint_t" + std::to_string(t + 1));
    if (fs::exists(ckpt / "state.json") && fs::exists(ckpt / "model.lmlw") &&
        fs::exists(ckpt / "expert.lmlw") && fs::exists(ckpt / "acm.csv")) {
      latest = t;
      break;
    }
  }
  if (latest < 0) return false;
  const fs::path ckpt = out / ("checkpoint_t" + std::to_string(latest + 1));
  log_info("resuming from %s", ckpt.string().c_str());

  std::ifstream sf(ckpt / "state.json");
  json state = json::parse(sf);
  if (state.value("schema", 0) != kResultsSchemaVersion) {
    throw FormatError("checkpoint schema " + std::to_string(state.value("schema", 0)) +
                      " unsupported, expected " + std::to_string(kResultsSchemaVersion));
  }
  if (state.value("dataset_checksum", std::string()) != hex64(dataset_checksum(stream_))) {
    throw ConfigError("resume: dataset does not match checkpoint");
  }
  json stored_cfg = state.at("config");
  json current_cfg = json::parse(cfg_.to_json());
  if (stored_cfg != current_cfg) {
    throw ConfigError("resume: run configuration differs from checkpoint");
  }

  const NamedTensors model = load_tensors((ckpt / "model.lmlw").string());
  auto tensors = params_.tensors();
  const auto& tnames = ModelParams::tensor_names();
  for (size_t i = 0; i < tensors.size(); ++i) *tensors[i] = tensor_named(model, tnames[i]);
  for (size_t i = 0; i < velocity_.size(); ++i) {
    velocity_[i] = tensor_named(model, "vel_" + tnames[i]);
  }

  // Embedding rows are a pure function of (seed, class index); re-grow and
  // verify against the stored copy. The boundary grows for the next task
  // before checkpointing, so mirror that here.
  const int grown_until = std::min(latest + 1, stream_.num_tasks() - 1);
  for (int t = 1; t <= grown_until; ++t) {
    std::vector<std::string> names(
        stream_.labels.names().begin() + stream_.labels.task_begin(t),
        stream_.labels.names().begin() + stream_.labels.task_end(t));
    h0_.grow(names);
  }
  if (checksum(h0_.rows()) != checksum(tensor_named(model, "h0"))) {
    throw ConfigError("resume: embedding seed does not match checkpoint");
  }

  const NamedTensors xpt = load_tensors((ckpt / "expert.lmlw").string());
  ModelParams xparams = params_;
  auto xtensors = xparams.tensors();
  for (size_t i = 0; i < xtensors.size(); ++i) {
    *xtensors[i] = tensor_named(xpt, "xpt_" + tnames[i]);
  }
  expert_.emplace(xparams, tensor_named(xpt, "corr"), tensor_named(xpt, "h0"));
  expert_checksum_ = expert_->state_checksum();

  const Mat frozen = read_matrix_csv((ckpt / "acm.csv").string());
  if (latest + 1 < stream_.num_tasks()) {
    cooc_.emplace(frozen, stream_.labels.task_size(latest + 1));
  }

  first_trained_.clear();
  for (const auto& v : state.at("first_trained")) first_trained_.push_back(metric_values_from(v));
  past_aggregates_.clear();
  for (const auto& v : state.at("past_aggregates")) {
    past_aggregates_.push_back(metric_values_from(v));
  }
  boundaries_.clear();
  for (const auto& jb : state.at("boundaries")) {
    BoundaryReport b;
    b.t = jb.at("t").get<int>() - 1;
    b.aggregate = metric_values_from(jb.at("aggregate"));
    for (const auto& v : jb.at("per_task")) b.per_task.push_back(metric_values_from(v));
    if (!jb.at("forget").is_null()) b.forget = forgetting_from(jb.at("forget"));
    if (!jb.at("forget_aggregate").is_null()) {
      b.forget_aggregate = forgetting_from(jb.at("forget_aggregate"));
    }
    boundaries_.push_back(std::move(b));
  }
  const json& audit = state.at("audit");
  audit_.train_examples_seen = audit.at("train_examples_seen").get<uint64_t>();
  audit_.train_batches = audit.at("train_batches").get<uint64_t>();
  audit_.expert_checks = audit.at("expert_checks").get<uint64_t>();
  audit_.expert_violations = audit.at("expert_violations").get<uint64_t>();
  audit_.label_width_violations = audit.at("label_width_violations").get<uint64_t>();

  completed_ = latest;
  pending_boundary_ = -1;
  return true;
}

RunResult Trainer::run() {
  if (cfg_.resume) {
    if (cfg_.out_dir.empty()) {
      throw ConfigError("resume requires out (no checkpoint directory given)");
    }
    try_resume();
  }
  for (int t = completed_ + 1; t < stream_.num_tasks(); ++t) {
    train_task(t);
    task_boundary(t);
  }
  if (samples_.empty() && completed_ == stream_.num_tasks() - 1 && expert_) {
    // Resumed past the final boundary: rebuild the sample listing from the
    // restored final state.
    collect_samples(row_normalize(expert_->correlation()));
  }
  RunResult result;
  result.dataset_checksum = dataset_checksum(stream_);
  result.run_id = run_id_for(cfg_, result.dataset_checksum);
  result.boundaries = boundaries_;
  result.samples = samples_;
  result.audit = audit_;
  if (!cfg_.out_dir.empty()) write_run_files(cfg_, stream_, result);
  return result;
}

}  // namespace lml
