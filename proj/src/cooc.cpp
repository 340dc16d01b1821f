#include "lml/cooc.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lml/errors.hpp"

namespace lml {

CoocStats::CoocStats(Mat frozen_old, int new_classes)
    : frozen_old_(std::move(frozen_old)), new_count_(new_classes) {
  if (frozen_old_.rows() != frozen_old_.cols()) {
    throw ShapeError("CoocStats: frozen old-old block must be square, got " +
                     shape_str(frozen_old_));
  }
  if (new_classes < 1) throw ConfigError("CoocStats: need at least one new class");
  n_pos_ = Vec::Zero(new_count_);
  n_pair_ = Mat::Zero(new_count_, new_count_);
  soft_sum_ = Vec::Zero(old_count());
  cross_sum_ = Mat::Zero(old_count(), new_count_);
}

void CoocStats::update_hard(const Mat& task_labels) {
  if (task_labels.cols() != new_count_) {
    throw ShapeError("update_hard: label width " + std::to_string(task_labels.cols()) +
                     " != task class count " + std::to_string(new_count_));
  }
  if (!((task_labels.array() == 0.0) || (task_labels.array() == 1.0)).all()) {
    throw ConfigError("update_hard: task labels must be 0/1");
  }
  if (task_labels.rows() == 0) return;
  n_pos_ += task_labels.colwise().sum().transpose();
  n_pair_.noalias() += task_labels.transpose() * task_labels;
}

void CoocStats::update_soft(const Mat& soft_old, const Mat& task_labels) {
  if (soft_old.rows() != task_labels.rows()) {
    throw ShapeError("update_soft: " + std::to_string(soft_old.rows()) +
                     " soft-label rows vs " + std::to_string(task_labels.rows()) +
                     " hard-label rows");
  }
  if (soft_old.cols() != old_count()) {
    throw ShapeError("update_soft: soft-label width " + std::to_string(soft_old.cols()) +
                     " != old class count " + std::to_string(old_count()));
  }
  if (task_labels.cols() != new_count_) {
    throw ShapeError("update_soft: label width " + std::to_string(task_labels.cols()) +
                     " != task class count " + std::to_string(new_count_));
  }
  if (((soft_old.array() < 0.0) || (soft_old.array() > 1.0)).any()) {
    throw ConfigError("update_soft: soft labels must lie in [0, 1]");
  }
  if (soft_old.rows() == 0) return;
  soft_sum_ += soft_old.colwise().sum().transpose();
  cross_sum_.noalias() += soft_old.transpose() * task_labels;
}

Mat CoocStats::assemble(bool zero_inter_task) const {
  const int n_old = old_count();
  const int n = seen_count();
  Mat a = Mat::Zero(n, n);
  a.topLeftCorner(n_old, n_old) = frozen_old_;

  // New-new: P(i|j) = N_ij / N_j, unit diagonal, zero for unseen j.
  for (int j = 0; j < new_count_; ++j) {
    const double nj = n_pos_(j);
    for (int i = 0; i < new_count_; ++i) {
      double v = 0.0;
      if (i == j) {
        v = 1.0;
      } else if (nj > 0.0) {
        v = n_pair_(i, j) / nj;
      }
      a(n_old + i, n_old + j) = v;
    }
  }

  if (!zero_inter_task && n_old > 0) {
    for (int j = 0; j < new_count_; ++j) {
      const double nj = n_pos_(j);
      for (int i = 0; i < n_old; ++i) {
        // Old-new from the soft/hard cross sums; new-old by Bayes' rule,
        // which reduces to cross_sum / soft_sum.
        a(i, n_old + j) = nj > 0.0 ? cross_sum_(i, j) / nj : 0.0;
        const double si = soft_sum_(i);
        a(n_old + j, i) = si > 0.0 ? cross_sum_(i, j) / si : 0.0;
      }
    }
  }

  // Conditional probabilities; the ratios cannot exceed 1 mathematically,
  // the clamp guards the frozen block and any rounding surprises.
  a = a.cwiseMax(0.0).cwiseMin(1.0);
  require_finite(a, "assemble");
  return a;
}

Mat row_normalize(const Mat& a) {
  if (a.rows() != a.cols()) {
    throw ShapeError("row_normalize: matrix must be square, got " + shape_str(a));
  }
  Mat m = a + Mat::Identity(a.rows(), a.cols());
  const Vec d = m.rowwise().sum();
  return d.cwiseInverse().asDiagonal() * m;
}

void write_matrix_csv(const std::string& path, const std::vector<std::string>& names,
                      const Mat& m) {
  if (static_cast<Eigen::Index>(names.size()) != m.cols()) {
    throw ShapeError("write_matrix_csv: " + std::to_string(names.size()) + " names for " +
                     std::to_string(m.cols()) + " columns");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  for (size_t i = 0; i < names.size(); ++i) {
    out << (i ? "," : "") << names[i];
  }
  out << "\n";
  char buf[64];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      out << (c ? "," : "") << buf;
    }
    out << "\n";
  }
  if (!out) throw FormatError("short write to '" + path + "'");
}

Mat read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open matrix csv '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty matrix csv '" + path + "'");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && rows[0].size() != row.size()) {
      throw FormatError("ragged matrix csv '" + path + "'");
    }
    rows.push_back(std::move(row));
  }
  const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index nc = nr > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Mat m(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r) {
    for (Eigen::Index c = 0; c < nc; ++c) m(r, c) = rows[static_cast<size_t>(r)][static_cast<size_t>(c)];
  }
  return m;
}

}  // namespace lml
