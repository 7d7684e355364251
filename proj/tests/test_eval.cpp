#include <doctest.h>

#include <cmath>
#include <random>

#include "bregtree/eval.hpp"
#include "bregtree/expfam.hpp"
#include "oracles.hpp"

using namespace bregtree;

namespace {

Dendrogram cluster_points(const std::vector<Datum>& pts) {
  auto model = squared_euclidean(pts.front().size());
  auto map = identity_map(pts.front().size());
  return agglomerate(pts, *model, *map, Smoother::none(), Strategy::Heap);
}

// Rebuild the tree with one internal node's children swapped.
Dendrogram swap_children(const Dendrogram& tree, int node_id) {
  std::vector<DendrogramNode> nodes = tree.nodes();
  std::swap(nodes[node_id].left, nodes[node_id].right);
  return Dendrogram(std::move(nodes));
}

}  // namespace

TEST_CASE("dendrogram purity") {
  // x1 = 0, x2 = 1, x3 = 10; tree = ((x1, x2), x3)
  const Dendrogram tree = cluster_points({{0.0}, {1.0}, {10.0}});

  SUBCASE("single label is pure") {
    CHECK(dendrogram_purity(tree, LabeledDataset{{"a", "a", "a"}}) == 1.0);
  }

  SUBCASE("root split along the classes is pure") {
    CHECK(dendrogram_purity(tree, LabeledDataset{{"a", "a", "b"}}) == 1.0);
  }

  SUBCASE("a same-label pair split across clusters dilutes purity") {
    // pair (x1, x3) shares label a; smallest common cluster is the root,
    // where a's fraction is 2/3
    CHECK(dendrogram_purity(tree, LabeledDataset{{"a", "b", "a"}}) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }

  SUBCASE("label and leaf counts must match") {
    CHECK_THROWS_AS(dendrogram_purity(tree, LabeledDataset{{"a", "b"}}),
                    UsageError);
  }

  SUBCASE("all-distinct labels leave the metric undefined") {
    CHECK_THROWS_AS(dendrogram_purity(tree, LabeledDataset{{"a", "b", "c"}}),
                    UndefinedMetricError);
  }
}

TEST_CASE("purity agrees with explicit pair enumeration") {
  std::mt19937 rng(127);
  const std::vector<std::string> alphabet{"a", "b", "c"};
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 3 + static_cast<int>(rng() % 30);
    const auto pts = oracles::random_points(m, 2, rng);
    const Dendrogram tree = cluster_points(pts);
    std::vector<std::string> labels(m);
    for (auto& l : labels) l = alphabet[rng() % 3];
    bool has_pair = false;
    for (int i = 0; i < m && !has_pair; ++i) {
      for (int j = i + 1; j < m; ++j) {
        if (labels[i] == labels[j]) {
          has_pair = true;
          break;
        }
      }
    }
    if (!has_pair) labels[1] = labels[0];
    const double fast = dendrogram_purity(tree, LabeledDataset{labels});
    const double slow = oracles::purity_by_pairs(tree, labels);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
    CHECK(fast >= 0.0);
    CHECK(fast <= 1.0);
  }
}

TEST_CASE("purity is invariant to child order") {
  std::mt19937 rng(131);
  const auto pts = oracles::random_points(16, 2, rng);
  const Dendrogram tree = cluster_points(pts);
  std::vector<std::string> labels(16);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = (i % 2 == 0) ? "x" : "y";
  }
  const double base = dendrogram_purity(tree, LabeledDataset{labels});
  for (int node = 16; node < 31; ++node) {
    const Dendrogram swapped = swap_children(tree, node);
    CHECK(dendrogram_purity(swapped, LabeledDataset{labels}) ==
          doctest::Approx(base).epsilon(1e-15));
  }
}

TEST_CASE("tree features") {
  auto model = squared_euclidean(2);
  auto map = identity_map(2);
  const std::vector<Datum> pts{{0.0, 0.0}, {1.0, 0.0}, {10.0, 0.0}, {11.0, 0.0}};
  const Dendrogram tree =
      agglomerate(pts, *model, *map, Smoother::none(), Strategy::Heap);

  SUBCASE("a datum sitting on a cluster center scores zero there") {
    const auto clusters = cut(tree, 2);
    const Datum center{clusters[0].stat[0], clusters[0].stat[1]};
    const auto f =
        tree_features(tree, 2, center, *model, *map, Smoother::none());
    REQUIRE(f.size() == 2);
    CHECK(f[0] == 0.0);
    CHECK(f[1] > 0.0);
  }

  SUBCASE("k = 1 measures the root") {
    const auto f =
        tree_features(tree, 1, Datum{3.0, 4.0}, *model, *map, Smoother::none());
    REQUIRE(f.size() == 1);
    CHECK(f[0] >= 0.0);
    // Ward form against the root summary
    const ClusterSummary root = cut(tree, 1)[0];
    const double n = static_cast<double>(root.size);
    const double gap = (root.stat[0] - 3.0) * (root.stat[0] - 3.0) +
                       (root.stat[1] - 4.0) * (root.stat[1] - 4.0);
    CHECK(f[0] == doctest::Approx(n / (n + 1.0) * gap).epsilon(1e-12));
  }

  SUBCASE("singleton clusters specialize to the scaled squared distance") {
    const auto f =
        tree_features(tree, 4, Datum{2.0, 2.0}, *model, *map, Smoother::none());
    REQUIRE(f.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      const double gap = (pts[i][0] - 2.0) * (pts[i][0] - 2.0) +
                         (pts[i][1] - 2.0) * (pts[i][1] - 2.0);
      CHECK(f[i] == doctest::Approx(0.5 * gap).epsilon(1e-12));
    }
  }

  SUBCASE("k out of range") {
    CHECK_THROWS_AS(
        tree_features(tree, 0, Datum{0.0, 0.0}, *model, *map, Smoother::none()),
        UsageError);
    CHECK_THROWS_AS(
        tree_features(tree, 5, Datum{0.0, 0.0}, *model, *map, Smoother::none()),
        UsageError);
  }
}

TEST_CASE("smoothed features stay finite for expfam models") {
  std::mt19937 rng(137);
  const std::vector<double> sig{1.0, 1.0};
  auto model = divergence_model_of(Family::GaussianFull, 2);
  auto map = gaussian_moment_map(2, false);
  const Smoother sm = gaussian_smoother_full(sig, 30);
  const auto pts = oracles::random_points(30, 2, rng);
  const Dendrogram tree = agglomerate(pts, *model, *map, sm, Strategy::Heap);
  for (int trial = 0; trial < 20; ++trial) {
    const auto probe = oracles::random_points(1, 2, rng);
    const auto f = tree_features(tree, 5, probe[0], *model, *map, sm);
    for (double v : f) {
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
    }
  }
}
