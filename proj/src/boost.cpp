#include "opboost/boost.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "opboost/errors.hpp"

namespace opboost {

namespace {

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

double clamp_prob(double p) { return std::min(1.0 - 1e-6, std::max(1e-6, p)); }

double leaf_weight_for(const std::vector<std::size_t>& idx, const std::vector<double>& g,
                       const std::vector<double>& h, const BoostParams& p) {
  double G = 0.0, H = 0.0;
  for (std::size_t i : idx) {
    G += g[i];
    H += h[i];
  }
  return -G / (H + p.reg_lambda);
}

double route_by_rank(const Tree& tree, const OrdinalDataset& ds, std::size_t i) {
  int id = 1;
  for (;;) {
    const TreeNode& nd = tree.nodes.at(id);
    if (nd.is_leaf) return nd.leaf_weight;
    std::uint32_t rank = ds.features[static_cast<std::size_t>(nd.feature_id)][i];
    id = rank <= nd.split_ordinal ? 2 * id : 2 * id + 1;
  }
}

void grow(Tree& tree, int id, int depth, std::vector<std::size_t> idx,
          const OrdinalDataset& ds, const std::vector<double>& g,
          const std::vector<double>& h, const BoostParams& p) {
  if (depth < p.max_layers && idx.size() >= 2) {
    if (auto choice = find_best_split(idx, ds, g, h, p)) {
      TreeNode nd;
      nd.is_leaf = false;
      nd.feature_id = choice->feature_id;
      nd.split_ordinal = choice->split_ordinal;
      nd.resolved = false;
      tree.nodes[id] = nd;
      std::vector<std::size_t> li, ri;
      for (std::size_t i : idx) {
        std::uint32_t rank = ds.features[static_cast<std::size_t>(choice->feature_id)][i];
        (rank <= choice->split_ordinal ? li : ri).push_back(i);
      }
      grow(tree, 2 * id, depth + 1, std::move(li), ds, g, h, p);
      grow(tree, 2 * id + 1, depth + 1, std::move(ri), ds, g, h, p);
      return;
    }
  }
  TreeNode nd;
  nd.is_leaf = true;
  nd.leaf_weight = leaf_weight_for(idx, g, h, p);
  tree.nodes[id] = nd;
}

}  // namespace

bool PartialForest::fully_resolved() const {
  for (const Tree& t : trees)
    for (const auto& [id, nd] : t.nodes)
      if (!nd.is_leaf && !nd.resolved) return false;
  return true;
}

double split_gain(double GL, double HL, double GR, double HR, const BoostParams& params) {
  double l = params.reg_lambda;
  return 0.5 * (GL * GL / (HL + l) + GR * GR / (HR + l) -
                (GL + GR) * (GL + GR) / (HL + HR + l)) -
         params.min_split_gain;
}

std::optional<SplitChoice> find_best_split(const std::vector<std::size_t>& indices,
                                           const OrdinalDataset& dataset,
                                           const std::vector<double>& g,
                                           const std::vector<double>& h,
                                           const BoostParams& params) {
  if (indices.size() < 2) return std::nullopt;
  std::optional<SplitChoice> best;
  std::vector<std::pair<std::uint32_t, std::size_t>> order;
  order.reserve(indices.size());
  for (std::size_t f = 0; f < dataset.features.size(); ++f) {
    const auto& col = dataset.features[f];
    order.clear();
    for (std::size_t i : indices) order.emplace_back(col[i], i);
    std::sort(order.begin(), order.end());
    double G = 0.0, H = 0.0;
    for (std::size_t i : indices) {
      G += g[i];
      H += h[i];
    }
    double GL = 0.0, HL = 0.0;
    for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
      GL += g[order[pos].second];
      HL += h[order[pos].second];
      if (order[pos + 1].first == order[pos].first) continue;  // not a gap
      double gain = split_gain(GL, HL, G - GL, H - HL, params);
      if (!best || gain > best->gain) {
        best = SplitChoice{static_cast<int>(f), order[pos].first, gain};
      }
    }
  }
  if (!best || best->gain <= 0.0) return std::nullopt;
  return best;
}

PartialForest train(const OrdinalDataset& dataset, const BoostParams& params) {
  std::size_t n = dataset.n;
  if (n < 2) throw DataError("train: need at least two samples");
  if (dataset.labels.size() != n) throw DataError("train: labels/sample count mismatch");
  for (const auto& col : dataset.features)
    if (col.size() != n) throw DataError("train: feature column length mismatch");

  PartialForest forest;
  forest.params = params;

  double mean = 0.0;
  for (double y : dataset.labels) mean += y;
  mean /= static_cast<double>(n);
  if (params.loss == Loss::Squared) {
    forest.base_score = mean;
  } else {
    double p = clamp_prob(mean);
    forest.base_score = std::log(p / (1.0 - p));
  }

  std::vector<double> score(n, forest.base_score);
  std::vector<double> g(n), h(n);
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;

  for (int t = 0; t < params.num_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      if (params.loss == Loss::Squared) {
        g[i] = score[i] - dataset.labels[i];
        h[i] = 1.0;
      } else {
        double p = clamp_prob(sigmoid(score[i]));
        g[i] = p - dataset.labels[i];
        h[i] = p * (1.0 - p);
      }
    }
    Tree tree;
    grow(tree, 1, 0, all, dataset, g, h, params);
    for (std::size_t i = 0; i < n; ++i)
      score[i] += params.learning_rate * route_by_rank(tree, dataset, i);
    forest.trees.push_back(std::move(tree));
  }
  return forest;
}

double predict(const PartialForest& forest, const std::vector<int>& values_by_feature) {
  double s = forest.base_score;
  for (const Tree& tree : forest.trees) {
    int id = 1;
    for (;;) {
      const TreeNode& nd = tree.nodes.at(id);
      if (nd.is_leaf) {
        s += forest.params.learning_rate * nd.leaf_weight;
        break;
      }
      if (!nd.resolved) throw ProtocolError("predict: forest has unresolved split values");
      int v = values_by_feature.at(static_cast<std::size_t>(nd.feature_id));
      id = v <= nd.split_value ? 2 * id : 2 * id + 1;
    }
  }
  return forest.params.loss == Loss::Logistic ? sigmoid(s) : s;
}

void resolve_with_columns(PartialForest& forest,
                          const std::vector<std::vector<int>>& value_columns,
                          const std::vector<std::vector<std::uint32_t>>& rank_columns) {
  if (value_columns.size() != rank_columns.size())
    throw DataError("resolve_with_columns: column count mismatch");
  // ordinal -> position lookup per feature, built on first use
  std::unordered_map<std::size_t, std::unordered_map<std::uint32_t, std::size_t>> lookup;
  for (Tree& tree : forest.trees) {
    for (auto& [id, nd] : tree.nodes) {
      if (nd.is_leaf || nd.resolved) continue;
      std::size_t f = static_cast<std::size_t>(nd.feature_id);
      if (f >= rank_columns.size()) throw DataError("resolve_with_columns: missing feature column");
      auto [it, fresh] = lookup.try_emplace(f);
      if (fresh)
        for (std::size_t pos = 0; pos < rank_columns[f].size(); ++pos)
          it->second.emplace(rank_columns[f][pos], pos);
      auto hit = it->second.find(nd.split_ordinal);
      if (hit == it->second.end())
        throw DataError("resolve_with_columns: ordinal not present in feature column");
      nd.split_value = value_columns[f][hit->second];
      nd.resolved = true;
    }
  }
}

std::string serialize_forest(const PartialForest& forest) {
  std::ostringstream os;
  os.precision(17);
  os << "# base_score=" << forest.base_score
     << " loss=" << (forest.params.loss == Loss::Logistic ? "logistic" : "squared")
     << " learning_rate=" << forest.params.learning_rate
     << " max_layers=" << forest.params.max_layers
     << " reg_lambda=" << forest.params.reg_lambda
     << " min_split_gain=" << forest.params.min_split_gain << "\n";
  os << "tree_id,node_id,kind,feature_id,split_ordinal,split_value,leaf_weight\n";
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    for (const auto& [id, nd] : forest.trees[t].nodes) {
      os << t << ',' << id << ',';
      if (nd.is_leaf) {
        os << "leaf,-1,0,0," << nd.leaf_weight;
      } else {
        os << "split," << nd.feature_id << ',' << nd.split_ordinal << ',';
        if (nd.resolved) os << nd.split_value;
        os << ",0";
      }
      os << '\n';
    }
  }
  return os.str();
}

PartialForest parse_forest(const std::string& text) {
  PartialForest forest;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string kv;
      while (meta >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        if (key == "base_score") forest.base_score = std::stod(val);
        else if (key == "learning_rate") forest.params.learning_rate = std::stod(val);
        else if (key == "max_layers") forest.params.max_layers = std::stoi(val);
        else if (key == "reg_lambda") forest.params.reg_lambda = std::stod(val);
        else if (key == "min_split_gain") forest.params.min_split_gain = std::stod(val);
        else if (key == "loss")
          forest.params.loss = val == "logistic" ? Loss::Logistic : Loss::Squared;
      }
      continue;
    }
    if (line.rfind("tree_id,", 0) == 0) continue;  // column header
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      auto comma = line.find(',', start);
      if (comma == std::string::npos) {
        f.push_back(line.substr(start));
        break;
      }
      f.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (f.size() != 7) throw DataError("parse_forest: malformed node line");
    std::size_t tree_id = static_cast<std::size_t>(std::stoul(f[0]));
    int node_id = std::stoi(f[1]);
    while (forest.trees.size() <= tree_id) forest.trees.emplace_back();
    TreeNode nd;
    if (f[2] == "leaf") {
      nd.is_leaf = true;
      nd.leaf_weight = std::stod(f[6]);
    } else if (f[2] == "split") {
      nd.is_leaf = false;
      nd.feature_id = std::stoi(f[3]);
      nd.split_ordinal = static_cast<std::uint32_t>(std::stoul(f[4]));
      if (!f[5].empty()) {
        nd.split_value = std::stoi(f[5]);
        nd.resolved = true;
      }
    } else {
      throw DataError("parse_forest: unknown node kind");
    }
    forest.trees[tree_id].nodes[node_id] = nd;
  }
  forest.params.num_trees = static_cast<int>(forest.trees.size());
  return forest;
}

}  // namespace opboost
