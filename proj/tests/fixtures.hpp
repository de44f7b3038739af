#pragma once

#include "eegconn/features.hpp"
#include "eegconn/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace fixtures {

inline std::vector<eegconn::FeatureId> generic_ids(Eigen::Index d) {
  std::vector<eegconn::FeatureId> ids;
  for (Eigen::Index j = 0; j < d; ++j) {
    ids.push_back({eegconn::Metric::pdc, "s" + std::to_string(j), "t" + std::to_string(j)});
  }
  return ids;
}

/// Isotropic Gaussian blobs with unit spread, one centre per class.
inline eegconn::Dataset blobs(const std::vector<Eigen::Vector2d>& centres, int per_class,
                              std::uint64_t seed) {
  eegconn::Rng rng(seed);
  eegconn::Dataset d;
  const int k = static_cast<int>(centres.size());
  d.features.resize(k * per_class, 2);
  d.class_names.clear();
  for (int c = 0; c < k; ++c) d.class_names.push_back("c" + std::to_string(c));
  for (int i = 0; i < per_class; ++i) {
    for (int c = 0; c < k; ++c) {
      const int r = i * k + c;
      d.features(r, 0) = centres[c](0) + rng.normal();
      d.features(r, 1) = centres[c](1) + rng.normal();
      d.labels.push_back(c);
      d.row_ids.push_back("r" + std::to_string(r));
    }
  }
  d.feature_ids = generic_ids(2);
  return d;
}

/// Two blobs 8 standard deviations apart: separable with a wide margin.
inline eegconn::Dataset separable_blobs(int per_class, std::uint64_t seed) {
  return blobs({Eigen::Vector2d(-4, 0), Eigen::Vector2d(4, 0)}, per_class, seed);
}

struct InformativeSet {
  eegconn::Dataset data;
  std::vector<int> informative;
};

/// n_classes x per_class rows of standard normal noise; `n_informative`
/// randomly placed columns get class-dependent means, class c shifted by
/// shift * (c - (n_classes - 1) / 2) in a per-feature random class order.
inline InformativeSet informative_dataset(int n_features, int n_informative, int n_classes,
                                          int per_class, double shift, std::uint64_t seed) {
  eegconn::Rng rng(seed);
  InformativeSet out;
  auto& d = out.data;
  const int n = n_classes * per_class;
  d.features.resize(n, n_features);
  for (int j = 0; j < n_features; ++j)
    for (int i = 0; i < n; ++i) d.features(i, j) = rng.normal();
  d.class_names.clear();
  for (int c = 0; c < n_classes; ++c) d.class_names.push_back("c" + std::to_string(c));
  for (int i = 0; i < n; ++i) {
    d.labels.push_back(i % n_classes);
    d.row_ids.push_back("r" + std::to_string(i));
  }
  std::vector<int> columns(n_features);
  for (int j = 0; j < n_features; ++j) columns[j] = j;
  eegconn::shuffle(columns.begin(), columns.end(), rng);
  out.informative.assign(columns.begin(), columns.begin() + n_informative);
  for (const int j : out.informative) {
    std::vector<int> order(n_classes);
    for (int c = 0; c < n_classes; ++c) order[c] = c;
    eegconn::shuffle(order.begin(), order.end(), rng);
    for (int i = 0; i < n; ++i) {
      d.features(i, j) += shift * (order[d.labels[i]] - (n_classes - 1) / 2.0);
    }
  }
  d.feature_ids = generic_ids(n_features);
  return out;
}

}  // namespace fixtures
