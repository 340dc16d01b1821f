#include "lml/presets.hpp"

#include "lml/errors.hpp"

namespace lml {

namespace {

constexpr const char* kGridName = "loss-weight-grid";

struct GridRow {
  const char* name;
  double l1, l2, l3;
};

// The lambda sweep: three graph-loss-free rows scanning lambda1/lambda2,
// then the best of those with the preservation weight turned up.
constexpr GridRow kGrid[] = {
    {"lw-0.05-0.95-0", 0.05, 0.95, 0.0},    {"lw-0.07-0.93-0", 0.07, 0.93, 0.0},
    {"lw-0.09-0.91-0", 0.09, 0.91, 0.0},    {"lw-0.07-0.93-1e4", 0.07, 0.93, 1e4},
    {"lw-0.07-0.93-1e5", 0.07, 0.93, 1e5},  {"lw-0.07-0.93-1e6", 0.07, 0.93, 1e6},
};

}  // namespace

bool is_grid_preset(const std::string& name) { return name == kGridName; }

std::vector<std::string> preset_names() {
  return {"agcn-default", "fine-tuning", "intra-only", kGridName};
}

void apply_preset(RunConfig& cfg, const std::string& name) {
  cfg.preset = name;
  if (name == "agcn-default") {
    cfg.weights = {0.07, 0.93, 1e5};
    cfg.ablate_inter_task = false;
  } else if (name == "fine-tuning") {
    cfg.weights = {1.0, 0.0, 0.0};
    cfg.ablate_inter_task = false;
  } else if (name == "intra-only") {
    cfg.weights = {0.07, 0.93, 1e5};
    cfg.ablate_inter_task = true;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
}

std::vector<RunConfig> expand_grid(const RunConfig& base) {
  std::vector<RunConfig> runs;
  for (const GridRow& row : kGrid) {
    RunConfig cfg = base;
    cfg.preset = row.name;
    cfg.weights = {row.l1, row.l2, row.l3};
    runs.push_back(std::move(cfg));
  }
  return runs;
}

}  // namespace lml
