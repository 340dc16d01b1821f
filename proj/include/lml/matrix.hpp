#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>

#include "lml/errors.hpp"

namespace lml {

// Dense, double-precision, row-major matrices everywhere. Class counts stay
// in the low hundreds, so dense storage is the simple and correct choice.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

inline std::string shape_str(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void require_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " +
                     shape_str(b));
  }
}

inline void require_finite(const Mat& m, const char* where) {
  if (!m.allFinite()) {
    throw NumericError(std::string(where) + ": non-finite entries in " + shape_str(m) +
                       " result");
  }
}

// FNV-1a over raw bytes. Used for dataset checksums, determinism checks and
// the expert-immutability audit; not cryptographic.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t checksum(const Mat& m, uint64_t h = 0xcbf29ce484222325ull) {
  const int64_t dims[2] = {m.rows(), m.cols()};
  h = fnv1a(dims, sizeof(dims), h);
  return fnv1a(m.data(), sizeof(double) * static_cast<size_t>(m.size()), h);
}

}  // namespace lml
