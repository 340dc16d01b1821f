#include "lml/dataset.hpp"

#include <cstring>
#include <fstream>
#include <set>

#include "lml/errors.hpp"
#include "lml/log.hpp"
#include "lml/rng.hpp"

namespace lml {

void LabelSpace::add_task(const std::vector<std::string>& names) {
  if (names.empty()) throw ConfigError("LabelSpace: task class set must not be empty");
  std::set<std::string> seen(names_.begin(), names_.end());
  for (const auto& n : names) {
    if (!seen.insert(n).second) throw ConfigError("LabelSpace: duplicate class name '" + n + "'");
  }
  names_.insert(names_.end(), names.begin(), names.end());
  task_end_.push_back(static_cast<int>(names_.size()));
}

namespace {

std::string class_name(int global_index) { return "c" + std::to_string(global_index); }

// Unit-norm prototype for one class, derived from (seed, class index) only.
std::vector<double> class_prototype(uint64_t seed, int global_index, int dim) {
  Rng rng(mix_seed(seed, 0x70726f74ull + static_cast<uint64_t>(global_index)));
  std::vector<double> v(static_cast<size_t>(dim));
  double norm2 = 0.0;
  for (auto& x : v) {
    x = rng.gaussian();
    norm2 += x * x;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : v) x *= inv;
  return v;
}

}  // namespace

TaskStream generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.num_tasks < 1 || cfg.classes_per_task < 1 || cfg.feature_dim < 1 ||
      cfg.train_per_task < 1 || cfg.test_per_task < 1) {
    throw ConfigError("generate_synthetic: all counts must be >= 1");
  }
  if (cfg.cooccurrence_strength < 0.0 || cfg.cooccurrence_strength > 1.0) {
    throw ConfigError("generate_synthetic: cooccurrence_strength must be in [0, 1]");
  }
  const int num_classes = cfg.num_tasks * cfg.classes_per_task;
  if (cfg.feature_dim < num_classes) {
    log_info("feature_dim %d < %d classes: prototypes will crowd", cfg.feature_dim,
             num_classes);
  }

  TaskStream stream;
  stream.feature_dim = cfg.feature_dim;
  stream.seed = cfg.seed;
  for (int t = 0; t < cfg.num_tasks; ++t) {
    std::vector<std::string> names;
    for (int k = 0; k < cfg.classes_per_task; ++k) {
      names.push_back(class_name(t * cfg.classes_per_task + k));
    }
    stream.labels.add_task(names);
  }

  Rng rng(cfg.seed);

  // Symmetric pairwise affinity, zero diagonal. Cubed uniforms keep most
  // pairs weak and a few strong; symmetric balancing equalizes per-class
  // affinity mass so no class dominates the co-occurrence statistics; the
  // 0.45 cap keeps label sets sparse. Together these keep the conditional
  // ordering of the streamed statistics aligned with the affinity ordering.
  stream.affinity = Mat::Zero(num_classes, num_classes);
  for (int i = 0; i < num_classes; ++i) {
    for (int j = i + 1; j < num_classes; ++j) {
      const double u = rng.uniform();
      const double a = u * u * u;
      stream.affinity(i, j) = a;
      stream.affinity(j, i) = a;
    }
  }
  if (num_classes > 1) {
    for (int iter = 0; iter < 100; ++iter) {
      const Vec d = stream.affinity.rowwise().sum();
      for (int i = 0; i < num_classes; ++i) {
        for (int j = 0; j < num_classes; ++j) {
          if (i != j) stream.affinity(i, j) /= std::sqrt(d(i) * d(j));
        }
      }
    }
    stream.affinity *= 0.45 / stream.affinity.maxCoeff();
  }

  std::vector<std::vector<double>> prototypes;
  prototypes.reserve(static_cast<size_t>(num_classes));
  for (int g = 0; g < num_classes; ++g) {
    prototypes.push_back(class_prototype(cfg.seed, g, cfg.feature_dim));
  }

  stream.tasks.resize(static_cast<size_t>(cfg.num_tasks));
  for (int t = 0; t < cfg.num_tasks; ++t) {
    Task& task = stream.tasks[static_cast<size_t>(t)];
    const int begin = stream.labels.task_begin(t);
    const int size = stream.labels.task_size(t);
    for (int split = 0; split < 2; ++split) {
      const int count = split == 0 ? cfg.train_per_task : cfg.test_per_task;
      auto& dst = split == 0 ? task.train : task.test;
      dst.reserve(static_cast<size_t>(count));
      for (int n = 0; n < count; ++n) {
        Example ex;
        ex.labels.assign(static_cast<size_t>(num_classes), 0);
        const int anchor = begin + rng.uniform_int(size);
        ex.labels[static_cast<size_t>(anchor)] = 1;
        for (int c = 0; c < num_classes; ++c) {
          if (c == anchor) continue;
          const double p =
              kBaseLabelRate + cfg.cooccurrence_strength * stream.affinity(anchor, c);
          if (rng.uniform() < p) ex.labels[static_cast<size_t>(c)] = 1;
        }
        std::vector<double> feat(static_cast<size_t>(cfg.feature_dim), 0.0);
        for (int c = 0; c < num_classes; ++c) {
          if (!ex.labels[static_cast<size_t>(c)]) continue;
          const auto& proto = prototypes[static_cast<size_t>(c)];
          for (int k = 0; k < cfg.feature_dim; ++k) feat[static_cast<size_t>(k)] += proto[static_cast<size_t>(k)];
        }
        ex.features.resize(static_cast<size_t>(cfg.feature_dim));
        for (int k = 0; k < cfg.feature_dim; ++k) {
          ex.features[static_cast<size_t>(k)] =
              static_cast<float>(feat[static_cast<size_t>(k)] + cfg.noise_std * rng.gaussian());
        }
        dst.push_back(std::move(ex));
      }
    }
  }
  return stream;
}

Vec project_partial(const Example& ex, const LabelSpace& labels, int task_index) {
  if (task_index < 0 || task_index >= labels.num_tasks()) {
    throw ConfigError("project_partial: task index " + std::to_string(task_index) +
                      " out of range");
  }
  const int begin = labels.task_begin(task_index);
  const int size = labels.task_size(task_index);
  Vec out(size);
  for (int k = 0; k < size; ++k) {
    out(k) = static_cast<double>(ex.labels[static_cast<size_t>(begin + k)]);
  }
  return out;
}

Mat batch_features(const std::vector<Example>& examples, int begin, int count) {
  const int dim = examples.empty() ? 0 : static_cast<int>(examples[0].features.size());
  Mat out(count, dim);
  for (int r = 0; r < count; ++r) {
    const auto& f = examples[static_cast<size_t>(begin + r)].features;
    for (int c = 0; c < dim; ++c) out(r, c) = static_cast<double>(f[static_cast<size_t>(c)]);
  }
  return out;
}

Mat batch_task_labels(const std::vector<Example>& examples, int begin, int count,
                      const LabelSpace& labels, int task_index) {
  const int cb = labels.task_begin(task_index);
  const int size = labels.task_size(task_index);
  Mat out(count, size);
  for (int r = 0; r < count; ++r) {
    const auto& l = examples[static_cast<size_t>(begin + r)].labels;
    for (int k = 0; k < size; ++k) out(r, k) = static_cast<double>(l[static_cast<size_t>(cb + k)]);
  }
  return out;
}

Mat full_label_matrix(const std::vector<Example>& examples, int num_cols) {
  Mat out(static_cast<Eigen::Index>(examples.size()), num_cols);
  for (size_t r = 0; r < examples.size(); ++r) {
    for (int c = 0; c < num_cols; ++c) {
      out(static_cast<Eigen::Index>(r), c) = static_cast<double>(examples[r].labels[static_cast<size_t>(c)]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// LMLD binary format.
//   "LMLD" | version u32 | num_classes u32 | feature_dim u32 | num_tasks u32
//   | per task: begin u32, end u32 | record_count u64
//   | records: split u8 (0 train / 1 test), task u32, features f32 x dim,
//     labels packed LSB-first into ceil(num_classes / 8) bytes.
// Label padding bits must be zero; a set bit past num_classes means the
// writer disagreed about the label width.
// ---------------------------------------------------------------------------

namespace {

constexpr uint32_t kDatasetVersion = 1;
const char kMagic[4] = {'L', 'M', 'L', 'D'};

template <typename T>
void put(std::vector<uint8_t>& out, T v) {
  // Little-endian on every supported target.
  const auto* p = reinterpret_cast<const uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

struct Reader {
  const std::vector<uint8_t>& buf;
  uint64_t pos = 0;

  template <typename T>
  T get(const char* what) {
    if (pos + sizeof(T) > buf.size()) {
      throw FormatError(std::string("dataset truncated reading ") + what, pos);
    }
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
};

}  // namespace

std::vector<uint8_t> serialize_dataset(const TaskStream& stream) {
  std::vector<uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put<uint32_t>(out, kDatasetVersion);
  put<uint32_t>(out, static_cast<uint32_t>(stream.num_classes()));
  put<uint32_t>(out, static_cast<uint32_t>(stream.feature_dim));
  put<uint32_t>(out, static_cast<uint32_t>(stream.num_tasks()));
  for (int t = 0; t < stream.num_tasks(); ++t) {
    put<uint32_t>(out, static_cast<uint32_t>(stream.labels.task_begin(t)));
    put<uint32_t>(out, static_cast<uint32_t>(stream.labels.task_end(t)));
  }
  uint64_t records = 0;
  for (const auto& task : stream.tasks) records += task.train.size() + task.test.size();
  put<uint64_t>(out, records);

  const size_t label_bytes = (static_cast<size_t>(stream.num_classes()) + 7) / 8;
  for (int t = 0; t < stream.num_tasks(); ++t) {
    for (int split = 0; split < 2; ++split) {
      const auto& examples =
          split == 0 ? stream.tasks[static_cast<size_t>(t)].train : stream.tasks[static_cast<size_t>(t)].test;
      for (const Example& ex : examples) {
        put<uint8_t>(out, static_cast<uint8_t>(split));
        put<uint32_t>(out, static_cast<uint32_t>(t));
        for (float f : ex.features) put<float>(out, f);
        std::vector<uint8_t> packed(label_bytes, 0);
        for (size_t c = 0; c < ex.labels.size(); ++c) {
          if (ex.labels[c]) packed[c / 8] |= static_cast<uint8_t>(1u << (c % 8));
        }
        out.insert(out.end(), packed.begin(), packed.end());
      }
    }
  }
  return out;
}

uint64_t dataset_checksum(const TaskStream& stream) {
  const auto bytes = serialize_dataset(stream);
  return fnv1a(bytes.data(), bytes.size());
}

void save_dataset(const TaskStream& stream, const std::string& path) {
  const auto bytes = serialize_dataset(stream);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write to '" + path + "'");
}

TaskStream load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open dataset '" + path + "'");
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
  Reader r{buf};

  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw FormatError("bad magic, not an LMLD dataset", 0);
  }
  r.pos = 4;
  const uint32_t version = r.get<uint32_t>("version");
  if (version != kDatasetVersion) {
    throw FormatError("unsupported dataset version " + std::to_string(version), 4);
  }
  const uint32_t num_classes = r.get<uint32_t>("num_classes");
  const uint32_t feature_dim = r.get<uint32_t>("feature_dim");
  const uint32_t num_tasks = r.get<uint32_t>("num_tasks");
  if (num_classes == 0 || feature_dim == 0 || num_tasks == 0) {
    throw FormatError("zero-sized header field", 8);
  }

  TaskStream stream;
  stream.feature_dim = static_cast<int>(feature_dim);
  uint32_t expected_begin = 0;
  for (uint32_t t = 0; t < num_tasks; ++t) {
    const uint64_t range_pos = r.pos;
    const uint32_t begin = r.get<uint32_t>("task range begin");
    const uint32_t end = r.get<uint32_t>("task range end");
    if (begin != expected_begin || end <= begin || end > num_classes) {
      throw FormatError("task class ranges do not partition the class set", range_pos);
    }
    expected_begin = end;
    std::vector<std::string> names;
    for (uint32_t g = begin; g < end; ++g) names.push_back(class_name(static_cast<int>(g)));
    stream.labels.add_task(names);
  }
  if (expected_begin != num_classes) {
    throw FormatError("task class ranges do not cover all classes", r.pos);
  }

  const uint64_t records = r.get<uint64_t>("record count");
  stream.tasks.resize(num_tasks);
  const size_t label_bytes = (num_classes + 7) / 8;
  for (uint64_t n = 0; n < records; ++n) {
    const uint64_t record_pos = r.pos;
    const uint8_t split = r.get<uint8_t>("split tag");
    if (split > 1) throw FormatError("bad split tag", record_pos);
    const uint32_t task = r.get<uint32_t>("task id");
    if (task >= num_tasks) throw FormatError("task id out of range", record_pos);
    Example ex;
    ex.features.resize(feature_dim);
    for (uint32_t k = 0; k < feature_dim; ++k) ex.features[k] = r.get<float>("features");
    std::vector<uint8_t> packed(label_bytes);
    for (size_t b = 0; b < label_bytes; ++b) packed[b] = r.get<uint8_t>("labels");
    ex.labels.assign(num_classes, 0);
    for (size_t c = 0; c < static_cast<size_t>(num_classes); ++c) {
      ex.labels[c] = (packed[c / 8] >> (c % 8)) & 1u;
    }
    for (size_t c = num_classes; c < label_bytes * 8; ++c) {
      if ((packed[c / 8] >> (c % 8)) & 1u) {
        throw FormatError("label row wider than declared class count", record_pos);
      }
    }
    auto& dst = split == 0 ? stream.tasks[task].train : stream.tasks[task].test;
    dst.push_back(std::move(ex));
  }
  if (r.pos != buf.size()) {
    throw FormatError("trailing bytes after last record", r.pos);
  }
  return stream;
}

}  // namespace lml
