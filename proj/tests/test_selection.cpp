#include "doctest.h"

#include "fixtures.hpp"

#include "eegconn/selection.hpp"

#include <algorithm>
#include <set>

using namespace eegconn;

namespace {

// Column 0 separates the classes; the rest is noise.
Dataset one_informative(int noise_columns, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  const int n = 30;
  d.features.resize(n, noise_columns + 1);
  d.class_names = {"a", "b"};
  for (int i = 0; i < n; ++i) {
    d.labels.push_back(i % 2);
    d.row_ids.push_back("r" + std::to_string(i));
    d.features(i, 0) = (i % 2 ? 3.0 : -3.0) + 0.3 * rng.normal();
    for (int j = 1; j <= noise_columns; ++j) d.features(i, j) = rng.normal();
  }
  d.feature_ids = fixtures::generic_ids(noise_columns + 1);
  return d;
}

}  // namespace

TEST_CASE("ffs picks the informative feature first") {
  const auto d = one_informative(12, 3);
  FfsOptions o;
  o.k = 3;
  const auto picks = forward_feature_selection(d, o);
  REQUIRE_FALSE(picks.empty());
  CHECK(picks.front() == 0);
  CHECK(picks.size() <= 3);
  CHECK(std::set<int>(picks.begin(), picks.end()).size() == picks.size());
}

TEST_CASE("ffs is deterministic and job-count independent") {
  const auto set = fixtures::informative_dataset(30, 4, 3, 10, 2.5, 8);
  FfsOptions o;
  o.k = 6;
  o.seed = 5;
  const auto a = forward_feature_selection(set.data, o);
  CHECK(a == forward_feature_selection(set.data, o));
  o.jobs = 3;
  CHECK(a == forward_feature_selection(set.data, o));
}

TEST_CASE("ffs with k equal to d orders every feature") {
  const auto d = one_informative(4, 1);
  FfsOptions o;
  o.k = 5;
  auto picks = forward_feature_selection(d, o);
  REQUIRE(picks.size() == 5);
  std::sort(picks.begin(), picks.end());
  CHECK(picks == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("ffs target scorer runs for every family") {
  const auto d = one_informative(5, 2);
  for (const auto f : {ml::Family::svm, ml::Family::dt, ml::Family::rf, ml::Family::mlp}) {
    FfsOptions o;
    o.k = 2;
    o.scorer = FfsScorer::target;
    o.target = f;
    const auto picks = forward_feature_selection(d, o);
    REQUIRE_FALSE(picks.empty());
    CHECK(picks.front() == 0);
  }
}

TEST_CASE("rfe keeps informative features") {
  const auto set = fixtures::informative_dataset(60, 5, 3, 12, 3.0, 4);
  const auto kept = recursive_feature_elimination(set.data, 5);
  REQUIRE(kept.size() == 5);
  CHECK(std::is_sorted(kept.begin(), kept.end()));
  auto informative = set.informative;
  std::sort(informative.begin(), informative.end());
  CHECK(kept == informative);
}

TEST_CASE("rfe edge cases") {
  const auto d = one_informative(6, 9);
  CHECK(recursive_feature_elimination(d, 7) == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
  CHECK(recursive_feature_elimination(d, 1) == std::vector<int>{0});
  CHECK_THROWS_AS(recursive_feature_elimination(d, 0), std::invalid_argument);
}

TEST_CASE("rfe drops the higher index among identical columns") {
  auto d = one_informative(3, 6);
  d.features.col(3) = d.features.col(2);
  const auto kept = recursive_feature_elimination(d, 3);
  CHECK(std::find(kept.begin(), kept.end(), 2) != kept.end());
  CHECK(std::find(kept.begin(), kept.end(), 3) == kept.end());
}

TEST_CASE("select_features clamps k and dispatches") {
  const auto d = one_informative(3, 7);
  SelectorSpec s;
  s.k = 100;
  CHECK(select_features(d, s, ml::Family::svm, 1).size() == 4);
  s.kind = SelectorKind::none;
  CHECK(select_features(d, s, ml::Family::svm, 1) == std::vector<int>{0, 1, 2, 3});
  s.kind = SelectorKind::ffs;
  s.k = 1;
  CHECK(select_features(d, s, ml::Family::svm, 1) == std::vector<int>{0});
  CHECK(selector_from_string("rfe") == SelectorKind::rfe);
  CHECK_THROWS_AS(selector_from_string("lasso"), std::invalid_argument);
  CHECK(ffs_scorer_from_string(to_string(FfsScorer::target)) == FfsScorer::target);
}
