// Command-line experiment runner: desensitize, audit, metrics, train,
// rangequery. Every command is deterministic given --seed. Exit codes:
// 0 ok, 2 config error, 3 data error, 4 protocol error.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "opboost/audit.hpp"
#include "opboost/boost.hpp"
#include "opboost/csv.hpp"
#include "opboost/domain.hpp"
#include "opboost/errors.hpp"
#include "opboost/fedproto.hpp"
#include "opboost/metrics.hpp"
#include "opboost/rangequery.hpp"
#include "opboost/transport.hpp"

using namespace opboost;

namespace {

struct MechanismOpts {
  std::string mechanism = "adj";
  double epsilon = 1.0;
  double alpha = 1.0;
  int theta = 1;
  int lower = 1;
  int upper = 10;

  MechanismSpec build() const {
    MappedDomain d = MappedDomain::create(lower, upper, theta);
    if (mechanism == "global") return MechanismSpec::global_map(epsilon, d);
    if (mechanism == "adj") return MechanismSpec::adj_map(epsilon, alpha, d);
    if (mechanism == "local") return MechanismSpec::local_map(epsilon, alpha, d);
    if (mechanism == "grr") return MechanismSpec::grr(epsilon, d);
    throw ConfigError("unknown mechanism '" + mechanism + "' (global|adj|local|grr)");
  }
};

void add_mechanism_flags(CLI::App* cmd, MechanismOpts& m) {
  cmd->add_option("--mechanism", m.mechanism, "global|adj|local|grr")->capture_default_str();
  cmd->add_option("--epsilon", m.epsilon, "privacy budget (inf allowed)")->capture_default_str();
  cmd->add_option("--alpha", m.alpha, "budget split knob")->capture_default_str();
  cmd->add_option("--theta", m.theta, "partition length")->capture_default_str();
  cmd->add_option("--lower", m.lower, "mapped domain lower bound")->capture_default_str();
  cmd->add_option("--upper", m.upper, "mapped domain upper bound")->capture_default_str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write output file " + path);
  return out;
}

// ---------------------------------------------------------------- desensitize

struct DesensitizeOpts {
  MechanismOpts mech;
  std::string data, config, out, store;
  std::uint64_t seed = 1;
};

void cmd_desensitize(const DesensitizeOpts& o) {
  DatasetConfig cfg = parse_dataset_config(o.config);
  if (cfg.features.empty()) throw ConfigError("config declares no feature columns");
  MechanismSpec spec = o.mech.build();
  CsvTable table = read_csv(o.data);

  std::vector<RawFeature> raw;
  for (std::size_t f = 0; f < cfg.features.size(); ++f) {
    RawFeature rf;
    rf.feature_id = static_cast<std::uint32_t>(f);
    rf.name = cfg.features[f].name;
    rf.lower = cfg.features[f].lower;
    rf.upper = cfg.features[f].upper;
    rf.values = table.numeric_column(cfg.features[f].name);
    raw.push_back(std::move(rf));
  }

  SeededRng rng(o.seed);
  PreparedParty prep = partyB_prepare(raw, spec, rng);

  std::ofstream out = open_out(o.out);
  for (std::size_t f = 0; f < raw.size(); ++f) {
    if (f) out << ',';
    out << raw[f].name << "_value," << raw[f].name << "_rank";
  }
  out << '\n';
  std::size_t n = table.rows.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < raw.size(); ++f) {
      if (f) out << ',';
      out << prep.desensitized[f][i] << ',' << prep.messages[f].ranks[i];
    }
    out << '\n';
  }
  if (!o.store.empty()) prep.store.save_csv(o.store);

  std::cout << "desensitized " << raw.size() << " feature(s) x " << n << " row(s) with "
            << mechanism_name(spec.kind) << " epsilon=" << o.mech.epsilon << " into ["
            << o.mech.lower << "," << o.mech.upper << "], wrote " << o.out;
  if (!o.store.empty()) std::cout << " and store " << o.store;
  std::cout << "\n";
}

// ----------------------------------------------------------------------- audit

struct AuditOpts {
  MechanismOpts mech;
  std::vector<int> t_values = {1, 3, 10};
  bool partition = false;
  std::string out;
};

void cmd_audit(const AuditOpts& o) {
  MechanismSpec spec = o.mech.build();
  std::ofstream out = open_out(o.out);
  out << "mechanism,t,worst_log_ratio,claimed_bound,slack,passed\n";
  bool all_passed = true;
  for (int t : o.t_values) {
    AuditReport rep = o.partition ? audit_partition_dldp(spec, t) : audit_dldp(spec, t);
    out << rep.csv_row() << '\n';
    all_passed = all_passed && rep.passed;
    std::cout << rep.mechanism << " t=" << rep.t << " worst=" << rep.worst_log_ratio
              << " claimed=" << rep.claimed_bound << (rep.passed ? " PASS" : " FAIL")
              << (rep.distinguishable_pairs ? " (distinguishable cross-partition pairs)" : "")
              << "\n";
  }
  std::cout << (all_passed ? "audit passed" : "audit FAILED") << ", wrote " << o.out << "\n";
}

// --------------------------------------------------------------------- metrics

struct MetricsOpts {
  std::string table = "gamma";
  std::string out;
  std::uint64_t seed = 1;
  int domain_size = 100;
  int theta = 10;
  double epsilon = 0.1;
};

double worst_pair_probability(const MechanismSpec& spec, int t, bool cross_partition_only) {
  double worst = 2.0;
  const MappedDomain& d = spec.domain;
  for (int x1 = d.L; x1 + t <= d.R; ++x1) {
    int x2 = x1 + t;
    if (cross_partition_only && d.home_partition(x1) == d.home_partition(x2)) continue;
    worst = std::min(worst, order_preserving_prob_exact(spec, x1, x2));
  }
  if (worst > 1.5) throw ConfigError("no qualifying pair at distance " + std::to_string(t));
  return worst;
}

void metrics_gamma(const MetricsOpts& o, std::ofstream& out) {
  MappedDomain d = MappedDomain::create(1, o.domain_size, o.theta);
  out << "mechanism,alpha,t,exact_prob,bound,slack\n";
  out.precision(10);
  std::cout << "worst-case order-preserving probability, domain size " << o.domain_size
            << ", theta " << o.theta << ", epsilon " << o.epsilon << "\n";
  for (int t = 5; t < o.domain_size; t += 10) {
    double exact = worst_pair_probability(MechanismSpec::grr(o.epsilon, d), t, false);
    double bound = gamma_bound_grr(t, o.epsilon, o.domain_size);
    out << "grr,," << t << ',' << exact << ',' << bound << ',' << exact - bound << '\n';
  }
  for (double alpha : {0.2, 0.5, 1.0, 2.0, 5.0}) {
    MechanismSpec adj = MechanismSpec::adj_map(o.epsilon, alpha, d);
    for (int t = 5; t < o.domain_size; t += 10) {
      double exact = worst_pair_probability(adj, t, false);
      double bound = gamma_bound_adj(t, adj.budget.epsilon_prt, o.theta, d.k);
      out << "adj," << alpha << ',' << t << ',' << exact << ',' << bound << ','
          << exact - bound << '\n';
    }
  }
  for (int t = 5; t < o.domain_size; t += 10) {
    // cross-partition pairs under the deterministic-partition mechanism
    // preserve order with certainty; report the exact value in both columns
    double exact =
        worst_pair_probability(MechanismSpec::local_map(o.epsilon, 1.0, d), t, true);
    out << "local,," << t << ',' << exact << ',' << exact << ",0\n";
  }
}

void metrics_beta(std::ofstream& out) {
  MappedDomain d = MappedDomain::create(1, 10, 2);
  MechanismSpec g = MechanismSpec::global_map(1.0, d);
  out << "scenario,split_point,beta\n";
  out.precision(10);
  std::vector<int> uniform = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  for (int split = 1; split <= 9; ++split)
    out << "uniform," << split << ',' << beta_split_probability({uniform, split, g}) << '\n';
  std::vector<int> bell = {4, 5, 5, 6, 6, 6, 7, 7, 8};
  for (int split = 4; split <= 8; ++split)
    out << "bell," << split << ',' << beta_split_probability({bell, split, g}) << '\n';
}

void metrics_kendall(const MetricsOpts& o, std::ofstream& out) {
  out << "series,epsilon,tau\n";
  out.precision(10);
  std::vector<double> up(200);
  std::iota(up.begin(), up.end(), 1.0);
  std::vector<double> down(up.rbegin(), up.rend());
  out << "identity,," << weighted_kendall(up, up) << '\n';
  out << "reversal,," << weighted_kendall(up, down) << '\n';

  MappedDomain d = MappedDomain::create(1, 64, 4);
  SeededRng data_rng(o.seed);
  std::vector<int> mapped;
  for (int i = 0; i < 500; ++i) mapped.push_back(1 + static_cast<int>(data_rng.uniform_int(64)));
  std::vector<double> truth(mapped.begin(), mapped.end());
  for (double eps : {0.08, 0.32, 1.28, 5.12}) {
    SeededRng rng(o.seed + 1);
    std::vector<int> noisy = desensitize(mapped, MechanismSpec::adj_map(eps, 1.0, d), rng);
    std::vector<double> nv(noisy.begin(), noisy.end());
    out << "adj_sweep," << eps << ',' << weighted_kendall(truth, nv) << '\n';
  }
}

void cmd_metrics(const MetricsOpts& o) {
  std::ofstream out = open_out(o.out);
  if (o.table == "gamma") metrics_gamma(o, out);
  else if (o.table == "beta") metrics_beta(out);
  else if (o.table == "kendall") metrics_kendall(o, out);
  else throw ConfigError("unknown metrics table '" + o.table + "' (gamma|beta|kendall)");
  std::cout << "wrote " << o.table << " table to " << o.out << "\n";
}

// ----------------------------------------------------------------------- train

struct TrainOpts {
  MechanismOpts mech;
  std::string data, config, out, model, store;
  std::string role;                // empty = both parties in-process
  std::string listen, connect_to;  // host:port
  std::string loss = "squared";
  double test_fraction = 0.2;
  int repeats = 1;
  std::uint64_t seed = 1;
  BoostParams boost;
};

struct SplitIdx {
  std::vector<std::size_t> train, test;
};

// seeded shuffle, first (1 - test_fraction) of rows train
SplitIdx split_rows(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (n < 2) throw DataError("need at least two rows to split");
  if (test_fraction < 0.0 || test_fraction >= 1.0)
    throw ConfigError("test fraction must be in [0, 1)");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  SeededRng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng.engine());
  std::size_t ntest = static_cast<std::size_t>(std::floor(n * test_fraction));
  if (n - ntest < 2) throw DataError("train split too small");
  SplitIdx s;
  s.train.assign(idx.begin(), idx.end() - static_cast<long>(ntest));
  s.test.assign(idx.end() - static_cast<long>(ntest), idx.end());
  return s;
}

struct ColumnData {
  ColumnSpec spec;
  std::uint32_t feature_id = 0;
  std::vector<double> values;
};

struct TrainInputs {
  std::vector<ColumnData> a_cols, b_cols;
  std::vector<double> labels;  // empty when absent from this party's file
  std::size_t n = 0;
};

bool has_column(const CsvTable& table, const std::string& name) {
  return std::find(table.header.begin(), table.header.end(), name) != table.header.end();
}

// b_optional: silently skip role-b columns this party's file does not carry
TrainInputs load_train_inputs(const TrainOpts& o, const DatasetConfig& cfg, bool need_labels,
                              bool need_a, bool need_b, bool b_optional = false) {
  CsvTable table = read_csv(o.data);
  TrainInputs in;
  in.n = table.rows.size();
  for (std::size_t f = 0; f < cfg.features.size(); ++f) {
    const ColumnSpec& c = cfg.features[f];
    if ((c.role == "a" && !need_a) || (c.role == "b" && !need_b)) continue;
    if (c.role == "b" && b_optional && !has_column(table, c.name)) continue;
    ColumnData col;
    col.spec = c;
    col.feature_id = static_cast<std::uint32_t>(f);
    col.values = table.numeric_column(c.name);
    (c.role == "a" ? in.a_cols : in.b_cols).push_back(std::move(col));
  }
  if (need_labels) {
    if (cfg.label_column.empty()) throw ConfigError("config declares no label column");
    in.labels = table.numeric_column(cfg.label_column);
  }
  return in;
}

std::vector<double> subset(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

struct RepeatResult {
  double metric = 0.0;  // test MSE (squared) or Brier score (logistic)
  double accuracy = 0.0;
  TrafficReport traffic;
  std::string model_text;
};

struct EvalResult {
  double mse = 0.0;
  double accuracy = 0.0;
};

// plain mapped test-row values, no noise; rows indexed by wire feature id
EvalResult evaluate_forest(const PartialForest& forest, const TrainInputs& in,
                           const SplitIdx& split, const MappedDomain& domain, Loss loss) {
  std::size_t nfeat = in.a_cols.size() + in.b_cols.size();
  std::uint32_t max_id = 0;
  for (const ColumnData& c : in.a_cols) max_id = std::max(max_id, c.feature_id);
  for (const ColumnData& c : in.b_cols) max_id = std::max(max_id, c.feature_id);
  std::vector<const ColumnData*> by_id(max_id + 1, nullptr);
  for (const ColumnData& c : in.a_cols) by_id.at(c.feature_id) = &c;
  for (const ColumnData& c : in.b_cols) by_id.at(c.feature_id) = &c;
  if (nfeat != by_id.size()) throw DataError("evaluation file is missing feature columns");

  EvalResult res;
  std::size_t correct = 0;
  for (std::size_t i : split.test) {
    std::vector<int> row(by_id.size(), 0);
    for (std::size_t f = 0; f < by_id.size(); ++f) {
      const ColumnData& c = *by_id[f];
      row[f] = map_value(c.values[i], c.spec.lower, c.spec.upper, domain);
    }
    double pred = predict(forest, row);
    double err = pred - in.labels[i];
    res.mse += err * err;
    if (loss == Loss::Logistic && (pred > 0.5) == (in.labels[i] > 0.5)) ++correct;
  }
  if (!split.test.empty()) {
    res.mse /= static_cast<double>(split.test.size());
    res.accuracy = static_cast<double>(correct) / static_cast<double>(split.test.size());
  }
  return res;
}

// one full loopback protocol round: B prepares/sends/serves, A trains/finalizes
RepeatResult run_loopback_repeat(const TrainOpts& o, const MechanismSpec& spec,
                                 const TrainInputs& in, const SplitIdx& split,
                                 std::uint64_t repeat_seed) {
  std::vector<RawFeature> raw;
  for (const ColumnData& c : in.b_cols) {
    RawFeature rf;
    rf.feature_id = c.feature_id;
    rf.name = c.spec.name;
    rf.lower = c.spec.lower;
    rf.upper = c.spec.upper;
    rf.values = subset(c.values, split.train);
    raw.push_back(std::move(rf));
  }

  auto [a_end, b_end] = make_loopback();
  TrafficLedger ledger;
  std::thread party_b([&]() {
    SeededRng rng(repeat_seed);
    PreparedParty prep = partyB_prepare(raw, spec, rng);
    send_features(*b_end, prep.messages, nullptr);
    partyB_serve(*b_end, prep.store, nullptr);
  });

  std::vector<FeatureMessage> messages = recv_features(*a_end, raw.size(), &ledger);
  std::vector<LocalFeature> locals;
  for (const ColumnData& c : in.a_cols) {
    LocalFeature lf;
    lf.feature_id = c.feature_id;
    for (std::size_t i : split.train)
      lf.values.push_back(map_value(c.values[i], c.spec.lower, c.spec.upper, spec.domain));
    locals.push_back(std::move(lf));
  }
  PartialForest forest =
      partyA_train(messages, locals, subset(in.labels, split.train), o.boost);
  forest = finalize(std::move(forest), *a_end, &ledger);
  party_b.join();

  EvalResult ev = evaluate_forest(forest, in, split, spec.domain, o.boost.loss);
  RepeatResult res;
  res.metric = ev.mse;
  res.accuracy = ev.accuracy;
  res.traffic = account_traffic(ledger, split.train.size(), in.b_cols.size(), 1,
                                o.boost.num_trees, o.boost.max_layers,
                                static_cast<std::size_t>(spec.domain.size()));
  res.model_text = serialize_forest(forest);
  return res;
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& s) {
  auto colon = s.rfind(':');
  if (colon == std::string::npos)
    return {"127.0.0.1", static_cast<std::uint16_t>(std::stoi(s))};
  return {s.substr(0, colon), static_cast<std::uint16_t>(std::stoi(s.substr(colon + 1)))};
}

void train_role_b(const TrainOpts& o, const MechanismSpec& spec, const DatasetConfig& cfg) {
  TrainInputs in = load_train_inputs(o, cfg, false, false, true);
  if (in.b_cols.empty()) throw ConfigError("role b has no role-b columns to serve");
  SplitIdx split = split_rows(in.n, o.test_fraction, o.seed);
  std::vector<RawFeature> raw;
  for (const ColumnData& c : in.b_cols) {
    RawFeature rf;
    rf.feature_id = c.feature_id;
    rf.name = c.spec.name;
    rf.lower = c.spec.lower;
    rf.upper = c.spec.upper;
    rf.values = subset(c.values, split.train);
    raw.push_back(std::move(rf));
  }
  SeededRng rng(o.seed);
  PreparedParty prep = partyB_prepare(raw, spec, rng);
  if (!o.store.empty()) prep.store.save_csv(o.store);

  auto [host, port] = parse_endpoint(o.listen);
  TcpListener listener(host, port);
  std::cout << "listening on " << host << ":" << listener.port() << "\n";
  auto ch = listener.accept_one();
  TrafficLedger ledger;
  send_features(*ch, prep.messages, &ledger);
  partyB_serve(*ch, prep.store, &ledger);
  std::ofstream out = open_out(o.out);
  out << "phase1_bytes,phase3_request_bytes,phase3_reply_bytes\n";
  out << ledger.phase1_b_to_a << ',' << ledger.phase3_a_to_b << ',' << ledger.phase3_b_to_a
      << '\n';
  std::cout << "served " << raw.size() << " feature(s), " << ledger.phase1_b_to_a
            << " bytes phase 1, " << ledger.phase3_b_to_a << " bytes phase 3, wrote " << o.out
            << "\n";
}

void train_role_a(const TrainOpts& o, const MechanismSpec& spec, const DatasetConfig& cfg) {
  TrainInputs in = load_train_inputs(o, cfg, true, true, true, /*b_optional=*/true);
  std::size_t b_count = 0;
  for (const ColumnSpec& c : cfg.features) b_count += c.role == "b" ? 1 : 0;
  SplitIdx split = split_rows(in.n, o.test_fraction, o.seed);

  auto [host, port] = parse_endpoint(o.connect_to);
  auto ch = TcpChannel::connect(host, port);
  TrafficLedger ledger;
  std::vector<FeatureMessage> messages = recv_features(*ch, b_count, &ledger);
  std::vector<LocalFeature> locals;
  for (const ColumnData& c : in.a_cols) {
    LocalFeature lf;
    lf.feature_id = c.feature_id;
    for (std::size_t i : split.train)
      lf.values.push_back(map_value(c.values[i], c.spec.lower, c.spec.upper, spec.domain));
    locals.push_back(std::move(lf));
  }
  PartialForest forest =
      partyA_train(messages, locals, subset(in.labels, split.train), o.boost);
  forest = finalize(std::move(forest), *ch, &ledger);
  if (!o.model.empty()) open_out(o.model) << serialize_forest(forest);
  TrafficReport traffic =
      account_traffic(ledger, split.train.size(), b_count, 1, o.boost.num_trees,
                      o.boost.max_layers, static_cast<std::size_t>(spec.domain.size()));
  std::cout << "trained " << forest.trees.size() << " tree(s); phase1 bytes "
            << traffic.phase1_bytes << " (fixed-width ratio " << traffic.phase1_fixed_ratio
            << "), phase3 reply " << traffic.phase3_reply_bytes << " <= bound "
            << traffic.phase3_fixed_bound << "\n";

  std::ofstream out = open_out(o.out);
  out.precision(10);
  out << "mechanism,epsilon,alpha,theta,mse_mean,mse_std,repeats\n";
  if (in.b_cols.size() == b_count) {
    EvalResult ev = evaluate_forest(forest, in, split, spec.domain, o.boost.loss);
    out << mechanism_name(spec.kind) << ',' << o.mech.epsilon << ',' << o.mech.alpha << ','
        << o.mech.theta << ',' << ev.mse << ",0," << 1 << '\n';
    std::cout << "test MSE " << ev.mse << "\n";
    if (o.boost.loss == Loss::Logistic)
      std::cout << "Accuracy " << 100.0 * ev.accuracy << "%\n";
  } else {
    std::cout << "evaluation skipped: this file lacks the remote feature columns\n";
  }
  std::cout << "wrote " << o.out << "\n";
}

void cmd_train(const TrainOpts& o) {
  DatasetConfig cfg = parse_dataset_config(o.config);
  MechanismSpec spec = o.mech.build();

  if (o.role == "b") {
    if (o.listen.empty()) throw ConfigError("--role b requires --listen");
    if (o.repeats != 1) throw ConfigError("tcp mode supports a single repeat");
    train_role_b(o, spec, cfg);
    return;
  }
  if (o.role == "a") {
    if (o.connect_to.empty()) throw ConfigError("--role a requires --connect");
    if (o.repeats != 1) throw ConfigError("tcp mode supports a single repeat");
    train_role_a(o, spec, cfg);
    return;
  }
  if (!o.role.empty()) throw ConfigError("--role must be a or b");
  if (o.repeats < 1) throw ConfigError("--repeats must be positive");

  TrainInputs in = load_train_inputs(o, cfg, true, true, true);
  if (in.labels.size() != in.n) throw DataError("label column length mismatch");
  if (in.a_cols.empty() && in.b_cols.empty())
    throw ConfigError("config declares no feature columns");
  SplitIdx split = split_rows(in.n, o.test_fraction, o.seed);

  // repeats run concurrently, each on its own derived seed
  std::vector<std::future<RepeatResult>> futures;
  for (int rep = 0; rep < o.repeats; ++rep)
    futures.push_back(std::async(std::launch::async, [&, rep]() {
      return run_loopback_repeat(o, spec, in, split, o.seed + static_cast<std::uint64_t>(rep));
    }));
  std::vector<RepeatResult> results;
  for (auto& f : futures) results.push_back(f.get());

  double mean = 0.0;
  for (const RepeatResult& r : results) mean += r.metric;
  mean /= static_cast<double>(results.size());
  double var = 0.0;
  for (const RepeatResult& r : results) var += (r.metric - mean) * (r.metric - mean);
  double stdev = results.size() > 1 ? std::sqrt(var / (results.size() - 1)) : 0.0;

  std::ofstream out = open_out(o.out);
  out.precision(10);
  out << "mechanism,epsilon,alpha,theta,mse_mean,mse_std,repeats\n";
  out << mechanism_name(spec.kind) << ',' << o.mech.epsilon << ',' << o.mech.alpha << ','
      << o.mech.theta << ',' << mean << ',' << stdev << ',' << o.repeats << '\n';
  if (!o.model.empty()) open_out(o.model) << results.back().model_text;

  const TrafficReport& t = results.back().traffic;
  std::cout << "train rows " << split.train.size() << ", test rows " << split.test.size()
            << ", trees " << o.boost.num_trees << "\n";
  std::cout << "test MSE " << mean << " +/- " << stdev << " over " << o.repeats
            << " repeat(s)\n";
  if (o.boost.loss == Loss::Logistic) {
    double acc = 0.0;
    for (const RepeatResult& r : results) acc += r.accuracy;
    std::cout << "Accuracy " << 100.0 * acc / results.size() << "%\n";
  }
  std::cout << "phase1 bytes " << t.phase1_bytes << " fixed-width ratio "
            << t.phase1_fixed_ratio << " info ratio " << t.phase1_info_ratio << "\n";
  std::cout << "phase3 request " << t.phase3_request_bytes << " reply "
            << t.phase3_reply_bytes << " bound " << t.phase3_fixed_bound
            << (t.phase3_within_bound ? " (within bound)" : " (OVER BOUND)") << "\n";
  std::cout << "wrote " << o.out;
  if (!o.model.empty()) std::cout << " and model " << o.model;
  std::cout << "\n";
}

// ------------------------------------------------------------------ rangequery

struct RangeQueryOpts {
  MechanismOpts mech;
  std::vector<double> epsilons;
  std::string data, config, out;
  std::size_t queries = 100;
  std::uint64_t seed = 1;
};

void cmd_rangequery(const RangeQueryOpts& o) {
  DatasetConfig cfg = parse_dataset_config(o.config);
  if (cfg.features.empty()) throw ConfigError("config declares no feature columns");
  MappedDomain domain = MappedDomain::create(o.mech.lower, o.mech.upper, o.mech.theta);
  CsvTable table = read_csv(o.data);
  std::vector<double> eps_list = o.epsilons.empty() ? std::vector<double>{o.mech.epsilon}
                                                    : o.epsilons;

  std::ofstream out = open_out(o.out);
  out.precision(10);
  out << "feature,mechanism,epsilon,alpha,theta,queries,mse\n";
  for (const ColumnSpec& c : cfg.features) {
    std::vector<double> values = table.numeric_column(c.name);
    std::vector<int> mapped;
    for (double v : values) mapped.push_back(map_value(v, c.lower, c.upper, domain));
    for (double eps : eps_list) {
      MechanismOpts m = o.mech;
      m.epsilon = eps;
      MechanismSpec spec = m.build();
      SeededRng qrng(o.seed);
      QuerySet qs = generate_queries(domain, o.queries, qrng);
      SeededRng rng(o.seed + 1);
      std::vector<int> noisy = desensitize(mapped, spec, rng);
      double mse = range_query_mse(mapped, noisy, qs);
      out << c.name << ',' << mechanism_name(spec.kind) << ',' << eps << ',' << o.mech.alpha
          << ',' << o.mech.theta << ',' << o.queries << ',' << mse << '\n';
      std::cout << c.name << " epsilon=" << eps << " range-query mse " << mse << "\n";
    }
  }
  std::cout << "wrote " << o.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"order-preserving desensitization toolkit"};
  app.require_subcommand(1);

  DesensitizeOpts des;
  CLI::App* cdes = app.add_subcommand("desensitize", "map, desensitize, and rank a dataset");
  add_mechanism_flags(cdes, des.mech);
  cdes->add_option("--data", des.data, "input CSV")->required();
  cdes->add_option("--config", des.config, "dataset sidecar config")->required();
  cdes->add_option("--out", des.out, "output CSV")->required();
  cdes->add_option("--store", des.store, "also write the (feature,ordinal)->value store");
  cdes->add_option("--seed", des.seed, "rng seed")->capture_default_str();
  cdes->callback([&des]() { cmd_desensitize(des); });

  AuditOpts aud;
  CLI::App* caud = app.add_subcommand("audit", "exhaustive worst-case privacy ratio check");
  add_mechanism_flags(caud, aud.mech);
  caud->add_option("--t", aud.t_values, "pair distances, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  caud->add_flag("--partition", aud.partition, "audit the two-budget partition claim");
  caud->add_option("--out", aud.out, "output CSV")->required();
  caud->callback([&aud]() { cmd_audit(aud); });

  MetricsOpts met;
  CLI::App* cmet = app.add_subcommand("metrics", "order-preservation metric tables");
  cmet->add_option("--table", met.table, "gamma|beta|kendall")->capture_default_str();
  cmet->add_option("--out", met.out, "output CSV")->required();
  cmet->add_option("--seed", met.seed, "rng seed (kendall sweep)")->capture_default_str();
  cmet->add_option("--domain-size", met.domain_size, "gamma table domain size")
      ->capture_default_str();
  cmet->add_option("--theta", met.theta, "gamma table partition length")->capture_default_str();
  cmet->add_option("--epsilon", met.epsilon, "gamma table budget")->capture_default_str();
  cmet->callback([&met]() { cmd_metrics(met); });

  TrainOpts tr;
  CLI::App* ctr = app.add_subcommand("train", "two-party boosted-tree training");
  add_mechanism_flags(ctr, tr.mech);
  ctr->add_option("--data", tr.data, "input CSV")->required();
  ctr->add_option("--config", tr.config, "dataset sidecar config")->required();
  ctr->add_option("--out", tr.out, "report CSV")->required();
  ctr->add_option("--model", tr.model, "model output file");
  ctr->add_option("--store", tr.store, "role b: persist the value store");
  ctr->add_option("--role", tr.role, "a|b for tcp mode; omit for in-process");
  ctr->add_option("--listen", tr.listen, "role b: host:port (port 0 picks one)");
  ctr->add_option("--connect", tr.connect_to, "role a: host:port of party b");
  ctr->add_option("--trees", tr.boost.num_trees, "boosting rounds")->capture_default_str();
  ctr->add_option("--eta", tr.boost.learning_rate, "learning rate")->capture_default_str();
  ctr->add_option("--layers", tr.boost.max_layers, "split levels per tree")
      ->capture_default_str();
  ctr->add_option("--reg-lambda", tr.boost.reg_lambda, "leaf regularization")
      ->capture_default_str();
  ctr->add_option("--min-gain", tr.boost.min_split_gain, "minimum split gain")
      ->capture_default_str();
  ctr->add_option("--loss", tr.loss, "squared|logistic")->capture_default_str();
  ctr->add_option("--test-fraction", tr.test_fraction, "held-out share")->capture_default_str();
  ctr->add_option("--repeats", tr.repeats, "independent repeats (in-process mode)")
      ->capture_default_str();
  ctr->add_option("--seed", tr.seed, "rng seed")->capture_default_str();
  ctr->callback([&tr]() {
    if (tr.loss == "logistic") tr.boost.loss = Loss::Logistic;
    else if (tr.loss == "squared") tr.boost.loss = Loss::Squared;
    else throw ConfigError("unknown loss '" + tr.loss + "' (squared|logistic)");
    cmd_train(tr);
  });

  RangeQueryOpts rq;
  CLI::App* crq = app.add_subcommand("rangequery", "range-count accuracy of noisy data");
  add_mechanism_flags(crq, rq.mech);
  crq->add_option("--epsilon-list", rq.epsilons, "sweep budgets, comma separated")
      ->delimiter(',');
  crq->add_option("--data", rq.data, "input CSV")->required();
  crq->add_option("--config", rq.config, "dataset sidecar config")->required();
  crq->add_option("--out", rq.out, "output CSV")->required();
  crq->add_option("--queries", rq.queries, "number of random ranges")->capture_default_str();
  crq->add_option("--seed", rq.seed, "rng seed")->capture_default_str();
  crq->callback([&rq]() { cmd_rangequery(rq); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit clean, bad flags are config errors
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
