#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "opboost/boost.hpp"
#include "opboost/domain.hpp"
#include "opboost/errors.hpp"

using namespace opboost;

namespace {

OrdinalDataset make_dataset(std::vector<std::vector<std::uint32_t>> features,
                            std::vector<double> labels) {
  OrdinalDataset ds;
  ds.n = labels.size();
  ds.features = std::move(features);
  ds.labels = std::move(labels);
  return ds;
}

double train_mse(const PartialForest& forest, const OrdinalDataset& ds,
                 const std::vector<std::vector<int>>& value_cols) {
  double acc = 0.0;
  for (std::size_t i = 0; i < ds.n; ++i) {
    std::vector<int> row;
    for (std::size_t f = 0; f < value_cols.size(); ++f) row.push_back(value_cols[f][i]);
    double e = predict(forest, row) - ds.labels[i];
    acc += e * e;
  }
  return acc / static_cast<double>(ds.n);
}

}  // namespace

TEST_SUITE("boost") {
  TEST_CASE("split gain closed form") {
    BoostParams p;  // reg_lambda = 1, min_split_gain = 0
    // 0.5 * (9/3 + 9/3 - 0/5) = 3
    CHECK(split_gain(3, 2, -3, 2, p) == 3.0);
    CHECK(split_gain(-3, 2, 3, 2, p) == 3.0);  // side swap changes nothing
    p.min_split_gain = 0.5;
    CHECK(split_gain(3, 2, -3, 2, p) == 2.5);
    p.min_split_gain = 0.0;
    p.reg_lambda = 0.0;
    CHECK(split_gain(2, 1, 0, 1, p) == doctest::Approx(0.5 * (4.0 - 2.0)));
  }

  TEST_CASE("best split on a separable column") {
    OrdinalDataset ds = make_dataset({{1, 2, 3, 4}}, {0, 0, 1, 1});
    std::vector<double> g = {0, 0, -1, -1}, h = {1, 1, 1, 1};
    BoostParams p;
    auto choice = find_best_split({0, 1, 2, 3}, ds, g, h, p);
    REQUIRE(choice.has_value());
    CHECK(choice->feature_id == 0);
    CHECK(choice->split_ordinal == 2);
    // 0.5 * (0 + 4/3 - 4/5)
    CHECK(choice->gain == doctest::Approx(4.0 / 15.0).epsilon(1e-12));
  }

  TEST_CASE("no split when nothing helps") {
    OrdinalDataset ds = make_dataset({{1, 2, 3, 4}}, {1, 1, 1, 1});
    std::vector<double> g = {0, 0, 0, 0}, h = {1, 1, 1, 1};
    BoostParams p;
    CHECK(!find_best_split({0, 1, 2, 3}, ds, g, h, p).has_value());
    // single sample cannot split either
    std::vector<double> g1 = {5, 0, 0, 0};
    CHECK(!find_best_split({0}, ds, g1, h, p).has_value());
  }

  TEST_CASE("tied ranks are not split points") {
    // both middle samples share rank 2: the only gaps are 1|2 and 2|3
    OrdinalDataset ds = make_dataset({{1, 2, 2, 3}}, {0, 1, 1, 0});
    std::vector<double> g = {1, -1, -1, 1}, h = {1, 1, 1, 1};
    BoostParams p;
    auto choice = find_best_split({0, 1, 2, 3}, ds, g, h, p);
    REQUIRE(choice.has_value());
    CHECK((choice->split_ordinal == 1 || choice->split_ordinal == 2));
  }

  TEST_CASE("best split matches a brute-force scan with documented tie-breaks") {
    std::mt19937 gen(7);
    for (int round = 0; round < 50; ++round) {
      const std::size_t n = 12;
      std::vector<std::uint32_t> f0(n), f1(n);
      std::iota(f0.begin(), f0.end(), 1u);
      std::iota(f1.begin(), f1.end(), 1u);
      std::shuffle(f0.begin(), f0.end(), gen);
      std::shuffle(f1.begin(), f1.end(), gen);
      std::uniform_real_distribution<double> gd(-1.0, 1.0), hd(0.5, 1.5);
      std::vector<double> g(n), h(n);
      for (std::size_t i = 0; i < n; ++i) {
        g[i] = gd(gen);
        h[i] = hd(gen);
      }
      OrdinalDataset ds = make_dataset({f0, f1}, std::vector<double>(n, 0.0));
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      BoostParams p;

      // brute force over (feature, threshold) with first-maximum tie-break
      int bf = -1;
      std::uint32_t bc = 0;
      double bg = 0.0;
      bool any = false;
      for (int f = 0; f < 2; ++f) {
        const auto& col = ds.features[static_cast<std::size_t>(f)];
        for (std::uint32_t c = 1; c < n; ++c) {
          double GL = 0, HL = 0, GR = 0, HR = 0;
          for (std::size_t i = 0; i < n; ++i) {
            if (col[i] <= c) {
              GL += g[i];
              HL += h[i];
            } else {
              GR += g[i];
              HR += h[i];
            }
          }
          double gain = split_gain(GL, HL, GR, HR, p);
          if (!any || gain > bg) {
            any = true;
            bf = f;
            bc = c;
            bg = gain;
          }
        }
      }
      auto choice = find_best_split(idx, ds, g, h, p);
      if (bg <= 0.0) {
        CHECK(!choice.has_value());
      } else {
        REQUIRE(choice.has_value());
        CHECK(choice->feature_id == bf);
        CHECK(choice->split_ordinal == bc);
        CHECK(choice->gain == doctest::Approx(bg).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("single tree on a two-level step function") {
    OrdinalDataset ds = make_dataset({{1, 2, 3, 4}}, {0, 0, 4, 4});
    BoostParams p;
    p.num_trees = 1;
    p.learning_rate = 1.0;
    PartialForest forest = train(ds, p);
    CHECK(forest.base_score == 2.0);
    REQUIRE(forest.trees.size() == 1);
    resolve_with_columns(forest, {{1, 2, 3, 4}}, {{1, 2, 3, 4}});
    CHECK(forest.fully_resolved());
    // leaves hold -G/(H+lambda) = -/+ 4/3 around the base
    CHECK(predict(forest, {1}) == doctest::Approx(2.0 - 4.0 / 3.0).epsilon(1e-12));
    CHECK(predict(forest, {2}) == doctest::Approx(2.0 - 4.0 / 3.0).epsilon(1e-12));
    CHECK(predict(forest, {4}) == doctest::Approx(2.0 + 4.0 / 3.0).epsilon(1e-12));
  }

  TEST_CASE("training loss never increases tree over tree") {
    const std::size_t n = 60;
    std::mt19937 gen(21);
    std::vector<int> values(n);
    std::iota(values.begin(), values.end(), 1);
    std::shuffle(values.begin(), values.end(), gen);
    std::vector<std::uint32_t> ranks = ordinalize(values);
    std::vector<double> labels(n);
    for (std::size_t i = 0; i < n; ++i)
      labels[i] = std::sin(values[i] / 6.0) + values[i] * 0.02;
    OrdinalDataset ds = make_dataset({ranks}, labels);
    BoostParams p;
    p.num_trees = 25;
    PartialForest forest = train(ds, p);
    resolve_with_columns(forest, {values}, {ranks});
    double prev = std::numeric_limits<double>::infinity();
    PartialForest prefix = forest;
    for (std::size_t keep = 1; keep <= forest.trees.size(); ++keep) {
      prefix.trees.assign(forest.trees.begin(), forest.trees.begin() + static_cast<long>(keep));
      double mse = train_mse(prefix, ds, {values});
      CHECK(mse <= prev + 1e-12);
      prev = mse;
    }
  }

  TEST_CASE("structure depends only on ranks, not values") {
    std::vector<int> values = {3, 1, 4, 1, 5, 9, 2, 6, 8, 7};
    std::vector<int> cubed;
    for (int v : values) cubed.push_back(v * v * v);
    CHECK(ordinalize(values) == ordinalize(cubed));
    std::vector<double> labels = {1, 0, 1, 0, 1, 1, 0, 0, 1, 0};
    BoostParams p;
    p.num_trees = 12;
    PartialForest a = train(make_dataset({ordinalize(values)}, labels), p);
    PartialForest b = train(make_dataset({ordinalize(cubed)}, labels), p);
    CHECK(serialize_forest(a) == serialize_forest(b));
  }

  TEST_CASE("node ids respect the depth budget") {
    const std::size_t n = 200;
    std::mt19937 gen(5);
    std::vector<std::uint32_t> ranks(n);
    std::iota(ranks.begin(), ranks.end(), 1u);
    std::shuffle(ranks.begin(), ranks.end(), gen);
    std::vector<double> labels(n);
    std::uniform_real_distribution<double> ld(0.0, 1.0);
    for (double& y : labels) y = ld(gen);
    OrdinalDataset ds = make_dataset({ranks}, labels);
    BoostParams p;
    p.num_trees = 5;
    p.max_layers = 3;
    PartialForest forest = train(ds, p);
    for (const Tree& t : forest.trees) {
      int splits = 0;
      for (const auto& [id, nd] : t.nodes) {
        CHECK(id >= 1);
        CHECK(id <= 15);  // deepest leaf level for 3 split levels
        if (!nd.is_leaf) {
          CHECK(id < 8);  // splits live strictly above the leaf level
          ++splits;
          // children of every split exist
          CHECK(t.nodes.count(2 * id) == 1);
          CHECK(t.nodes.count(2 * id + 1) == 1);
        }
      }
      CHECK(splits <= 7);
    }
  }

  TEST_CASE("text round-trip preserves the forest") {
    std::vector<int> values = {12, 7, 3, 9, 15, 1, 8, 2, 11, 5};
    std::vector<std::uint32_t> ranks = ordinalize(values);
    std::vector<double> labels = {1, 0, 0, 1, 1, 0, 1, 0, 1, 0};
    OrdinalDataset ds = make_dataset({ranks}, labels);
    BoostParams p;
    p.num_trees = 6;
    p.loss = Loss::Logistic;
    PartialForest forest = train(ds, p);
    CHECK(!forest.fully_resolved());

    std::string text = serialize_forest(forest);
    PartialForest parsed = parse_forest(text);
    CHECK(serialize_forest(parsed) == text);
    CHECK(!parsed.fully_resolved());
    CHECK(parsed.params.loss == Loss::Logistic);
    CHECK(parsed.params.num_trees == 6);

    resolve_with_columns(forest, {values}, {ranks});
    resolve_with_columns(parsed, {values}, {ranks});
    CHECK(serialize_forest(parsed) == serialize_forest(forest));
    for (int v : {0, 3, 8, 12, 99}) {
      double a = predict(forest, {v});
      double b = predict(parsed, {v});
      CHECK(a == b);
      CHECK(a > 0.0);
      CHECK(a < 1.0);
    }

    // resolved text keeps the values through another cycle
    std::string resolved_text = serialize_forest(forest);
    PartialForest again = parse_forest(resolved_text);
    CHECK(again.fully_resolved());
    CHECK(serialize_forest(again) == resolved_text);

    CHECK_THROWS_AS(parse_forest("0,1,banana,0,0,0,0\n"), DataError);
    CHECK_THROWS_AS(parse_forest("0,1,leaf,0\n"), DataError);
  }

  TEST_CASE("ties route to the left child") {
    PartialForest f;
    f.base_score = 0.0;
    f.params.learning_rate = 1.0;
    Tree t;
    TreeNode root;
    root.is_leaf = false;
    root.feature_id = 0;
    root.split_ordinal = 1;
    root.split_value = 5;
    root.resolved = true;
    t.nodes[1] = root;
    TreeNode l, r;
    l.is_leaf = true;
    l.leaf_weight = -1.0;
    r.is_leaf = true;
    r.leaf_weight = 1.0;
    t.nodes[2] = l;
    t.nodes[3] = r;
    f.trees.push_back(t);
    CHECK(predict(f, {5}) == -1.0);  // equality goes left
    CHECK(predict(f, {4}) == -1.0);
    CHECK(predict(f, {6}) == 1.0);

    // unresolved split refuses to predict
    f.trees[0].nodes[1].resolved = false;
    CHECK_THROWS_AS(predict(f, {5}), ProtocolError);
  }

  TEST_CASE("input validation") {
    BoostParams p;
    OrdinalDataset tiny = make_dataset({{1}}, {1.0});
    CHECK_THROWS_AS(train(tiny, p), DataError);
    OrdinalDataset mismatched = make_dataset({{1, 2, 3}}, {1.0, 2.0});
    mismatched.n = 2;
    CHECK_THROWS_AS(train(mismatched, p), DataError);
  }

  TEST_CASE("long boosting drives a step function to near-zero error") {
    const std::size_t n = 100;
    std::vector<std::uint32_t> ranks(n);
    std::iota(ranks.begin(), ranks.end(), 1u);
    std::vector<int> values(n);
    std::iota(values.begin(), values.end(), 1);
    std::vector<double> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = i < 30 ? 0.0 : (i < 70 ? 1.0 : 3.0);
    OrdinalDataset ds = make_dataset({ranks}, labels);
    BoostParams p;
    p.num_trees = 400;
    PartialForest forest = train(ds, p);
    resolve_with_columns(forest, {values}, {ranks});
    double mean = std::accumulate(labels.begin(), labels.end(), 0.0) / n;
    double var = 0.0;
    for (double y : labels) var += (y - mean) * (y - mean);
    var /= n;
    CHECK(train_mse(forest, ds, {values}) < 0.05 * var);
  }

  TEST_CASE("logistic loss separates a clean binary problem") {
    const std::size_t n = 40;
    std::vector<std::uint32_t> ranks(n);
    std::iota(ranks.begin(), ranks.end(), 1u);
    std::vector<int> values(n);
    std::iota(values.begin(), values.end(), 100);
    std::vector<double> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = i < 20 ? 0.0 : 1.0;
    OrdinalDataset ds = make_dataset({ranks}, labels);
    BoostParams p;
    p.loss = Loss::Logistic;
    PartialForest forest = train(ds, p);
    resolve_with_columns(forest, {values}, {ranks});
    for (std::size_t i = 0; i < n; ++i) {
      double prob = predict(forest, {values[i]});
      CHECK((prob > 0.5) == (labels[i] > 0.5));
      CHECK(prob >= 0.0);
      CHECK(prob <= 1.0);
    }
  }
}
