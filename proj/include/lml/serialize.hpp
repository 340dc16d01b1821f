#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lml/matrix.hpp"

namespace lml {

// Shape-tagged f64 tensor container ("LMLW"), little-endian throughout:
//   "LMLW" | version u32 | tensor count u32
//   | per tensor: name length u32, name bytes, rows u32, cols u32,
//     f64 data row-major.
// Used for model checkpoints and expert snapshots.
using NamedTensors = std::vector<std::pair<std::string, Mat>>;

void save_tensors(const std::string& path, const NamedTensors& tensors);
NamedTensors load_tensors(const std::string& path);

// Lookup helper; throws FormatError when the name is absent.
const Mat& tensor_named(const NamedTensors& tensors, const std::string& name);

uint64_t file_checksum(const std::string& path);

}  // namespace lml
