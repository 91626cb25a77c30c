#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hocl/rng.hpp"
#include "hocl/types.hpp"

namespace hocl {

/// A supervised dataset: m feature rows of width d plus m scalar labels.
struct Dataset {
  Matrix features;  // m x d
  Vector labels;    // m

  int size() const { return static_cast<int>(features.rows()); }
  int feature_dim() const { return static_cast<int>(features.cols()); }

  void validate() const {
    require(features.rows() >= 1, "dataset must contain at least one sample");
    require(labels.size() == features.rows(),
            "label count must equal the number of feature rows");
    require(features.allFinite() && labels.allFinite(),
            "dataset entries must be finite");
  }
};

inline Dataset take_rows(const Dataset& z, const std::vector<int>& rows) {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), z.features.cols());
  out.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = z.features.row(rows[i]);
    out.labels[static_cast<Eigen::Index>(i)] = z.labels[rows[i]];
  }
  return out;
}

/// Split z0 into a training and a validation resample.
///
/// Draw order (replayable from SplitMix64(seed), see hocl/rng.hpp):
///   with_replacement:  m1 draws of index_below(m0) for the first output,
///                      then m2 draws for the second.
///   without replacement: a Fisher-Yates shuffle of 0..m0-1 (for i = m0-1
///                      down to 1, j = index_below(i+1), swap positions i, j);
///                      first output takes shuffled positions 0..m1-1, second
///                      takes m1..m1+m2-1.
inline std::pair<Dataset, Dataset> bootstrap_split(const Dataset& z0, int m1,
                                                   int m2, std::uint64_t seed,
                                                   bool with_replacement) {
  z0.validate();
  const int m0 = z0.size();
  require(m1 > 0 && m2 > 0, "empty split");
  if (!with_replacement)
    require(m1 + m2 <= m0, "insufficient samples");

  SplitMix64 rng(seed);
  std::vector<int> idx1, idx2;
  idx1.reserve(m1);
  idx2.reserve(m2);
  if (with_replacement) {
    for (int i = 0; i < m1; ++i)
      idx1.push_back(static_cast<int>(rng.index_below(m0)));
    for (int i = 0; i < m2; ++i)
      idx2.push_back(static_cast<int>(rng.index_below(m0)));
  } else {
    std::vector<int> perm(m0);
    for (int i = 0; i < m0; ++i) perm[i] = i;
    for (int i = m0 - 1; i >= 1; --i) {
      int j = static_cast<int>(rng.index_below(static_cast<std::uint64_t>(i) + 1));
      std::swap(perm[i], perm[j]);
    }
    idx1.assign(perm.begin(), perm.begin() + m1);
    idx2.assign(perm.begin() + m1, perm.begin() + m1 + m2);
  }
  return {take_rows(z0, idx1), take_rows(z0, idx2)};
}

/// Dataset file format: UTF-8 CSV, first d columns features, last column the
/// label, optional header row.
inline Dataset load_dataset_csv(const std::filesystem::path& path,
                                bool has_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && has_header) {
      first = false;
      continue;
    }
    first = false;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("non-numeric cell '" + cell + "' in " +
                                 path.string());
      }
    }
    if (row.size() < 2)
      throw std::runtime_error("row with fewer than two columns in " +
                               path.string());
    if (!rows.empty() && rows.front().size() != row.size())
      throw std::runtime_error("ragged rows in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("empty dataset file: " + path.string());

  const int m = static_cast<int>(rows.size());
  const int d = static_cast<int>(rows.front().size()) - 1;
  Dataset z;
  z.features.resize(m, d);
  z.labels.resize(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) z.features(i, j) = rows[i][j];
    z.labels[i] = rows[i].back();
  }
  z.validate();
  return z;
}

inline void save_dataset_csv(const Dataset& z,
                             const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path.string());
  out.precision(17);
  const int d = z.feature_dim();
  for (int j = 0; j < d; ++j) out << "x" << j << ",";
  out << "y\n";
  for (int i = 0; i < z.size(); ++i) {
    for (int j = 0; j < d; ++j) out << z.features(i, j) << ",";
    out << z.labels[i] << "\n";
  }
}

}  // namespace hocl
