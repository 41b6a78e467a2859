#include "opboost/fedproto.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "opboost/domain.hpp"
#include "opboost/errors.hpp"

namespace opboost {

std::int32_t PartyBStore::lookup(std::uint32_t feature_id, std::uint32_t ordinal) const {
  auto it = values.find({feature_id, ordinal});
  if (it == values.end())
    throw ProtocolError("store: no value for feature " + std::to_string(feature_id) +
                        " ordinal " + std::to_string(ordinal));
  return it->second;
}

void PartyBStore::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("store: cannot write " + path);
  out << "feature_id,ordinal,value\n";
  for (const auto& [key, value] : values)
    out << key.first << ',' << key.second << ',' << value << '\n';
  if (!out) throw DataError("store: write failed for " + path);
}

PartyBStore PartyBStore::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("store: cannot read " + path);
  PartyBStore store;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("feature_id,", 0) == 0) continue;
    }
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
      throw DataError("store: malformed line in " + path);
    store.values[{static_cast<std::uint32_t>(std::stoul(a)),
                  static_cast<std::uint32_t>(std::stoul(b))}] =
        static_cast<std::int32_t>(std::stol(c));
  }
  return store;
}

PreparedParty partyB_prepare(const std::vector<RawFeature>& features,
                             const MechanismSpec& spec, SeededRng& rng) {
  PreparedParty out;
  for (const RawFeature& feat : features) {
    std::vector<int> mapped;
    mapped.reserve(feat.values.size());
    for (double v : feat.values) mapped.push_back(map_value(v, feat.lower, feat.upper, spec.domain));
    std::vector<int> desens = desensitize(mapped, spec, rng);
    std::vector<std::uint32_t> ranks = ordinalize(desens);
    for (std::size_t i = 0; i < desens.size(); ++i)
      out.store.values[{feat.feature_id, ranks[i]}] = desens[i];
    FeatureMessage msg;
    msg.feature_id = feat.feature_id;
    msg.ranks = std::move(ranks);
    out.messages.push_back(std::move(msg));
    out.desensitized.push_back(std::move(desens));
  }
  return out;
}

namespace {

void count(TrafficLedger* ledger, std::uint64_t TrafficLedger::*dir,
           std::uint64_t TrafficLedger::*phase, std::size_t bytes) {
  if (!ledger) return;
  ledger->*dir += bytes;
  ledger->*phase += bytes;
}

}  // namespace

void send_features(ByteChannel& ch, const std::vector<FeatureMessage>& msgs,
                   TrafficLedger* ledger) {
  for (const FeatureMessage& msg : msgs) {
    Frame frame = to_frame(msg);
    count(ledger, &TrafficLedger::bytes_b_to_a, &TrafficLedger::phase1_b_to_a,
          frame.wire_size());
    send_frame(ch, frame);
  }
}

std::vector<FeatureMessage> recv_features(ByteChannel& ch, std::size_t count_expected,
                                          TrafficLedger* ledger) {
  std::vector<FeatureMessage> msgs;
  msgs.reserve(count_expected);
  for (std::size_t i = 0; i < count_expected; ++i) {
    Frame frame = recv_frame(ch);
    count(ledger, &TrafficLedger::bytes_b_to_a, &TrafficLedger::phase1_b_to_a,
          frame.wire_size());
    msgs.push_back(decode_feature(frame));
  }
  return msgs;
}

PartialForest partyA_train(const std::vector<FeatureMessage>& messages,
                           const std::vector<LocalFeature>& local_features,
                           const std::vector<double>& labels, const BoostParams& params) {
  std::size_t n = labels.size();
  std::set<std::uint32_t> ids;
  for (const auto& m : messages) {
    if (m.ranks.size() != n) throw ProtocolError("partyA_train: sample count mismatch");
    if (!ids.insert(m.feature_id).second)
      throw ProtocolError("partyA_train: duplicate feature id");
    // rank columns must be permutations of 1..n
    std::vector<bool> seen(n + 1, false);
    for (std::uint32_t r : m.ranks) {
      if (r < 1 || r > n || seen[r]) throw ProtocolError("partyA_train: ranks not a permutation");
      seen[r] = true;
    }
  }
  for (const auto& lf : local_features) {
    if (lf.values.size() != n) throw ProtocolError("partyA_train: sample count mismatch");
    if (!ids.insert(lf.feature_id).second)
      throw ProtocolError("partyA_train: duplicate feature id");
  }

  OrdinalDataset ds;
  ds.n = n;
  ds.labels = labels;
  std::vector<std::vector<std::uint32_t>> local_ranks;
  for (const auto& m : messages) ds.features.push_back(m.ranks);
  for (const auto& lf : local_features) {
    local_ranks.push_back(ordinalize(lf.values));
    ds.features.push_back(local_ranks.back());
  }

  PartialForest forest = train(ds, params);

  // column index -> wire feature id; A-feature nodes get their values now
  std::size_t bcount = messages.size();
  for (Tree& tree : forest.trees) {
    for (auto& [id, nd] : tree.nodes) {
      if (nd.is_leaf) continue;
      std::size_t col = static_cast<std::size_t>(nd.feature_id);
      if (col < bcount) {
        nd.feature_id = static_cast<int>(messages[col].feature_id);
      } else {
        std::size_t li = col - bcount;
        const auto& ranks = local_ranks[li];
        for (std::size_t pos = 0; pos < ranks.size(); ++pos) {
          if (ranks[pos] == nd.split_ordinal) {
            nd.split_value = local_features[li].values[pos];
            nd.resolved = true;
            break;
          }
        }
        if (!nd.resolved) throw ProtocolError("partyA_train: local ordinal unresolved");
        nd.feature_id = static_cast<int>(local_features[li].feature_id);
      }
    }
  }
  return forest;
}

void partyB_serve(ByteChannel& ch, const PartyBStore& store, TrafficLedger* ledger) {
  Frame frame = recv_frame(ch);
  count(ledger, &TrafficLedger::bytes_a_to_b, &TrafficLedger::phase3_a_to_b,
        frame.wire_size());
  SplitRequest req = decode_split_request(frame);
  SplitReply reply;
  reply.items.reserve(req.items.size());
  for (const SplitRequestItem& it : req.items)
    reply.items.push_back({it.feature_id, it.ordinal, store.lookup(it.feature_id, it.ordinal)});
  Frame out = to_frame(reply);
  count(ledger, &TrafficLedger::bytes_b_to_a, &TrafficLedger::phase3_b_to_a,
        out.wire_size());
  send_frame(ch, out);
}

PartialForest finalize(PartialForest forest, ByteChannel& ch, TrafficLedger* ledger) {
  SplitRequest req;
  std::vector<TreeNode*> pending;
  for (Tree& tree : forest.trees) {
    for (auto& [id, nd] : tree.nodes) {
      if (nd.is_leaf || nd.resolved) continue;
      req.items.push_back({static_cast<std::uint32_t>(nd.feature_id), nd.split_ordinal});
      pending.push_back(&nd);
    }
  }
  Frame reqf = to_frame(req);
  count(ledger, &TrafficLedger::bytes_a_to_b, &TrafficLedger::phase3_a_to_b,
        reqf.wire_size());
  send_frame(ch, reqf);

  Frame repf = recv_frame(ch);
  count(ledger, &TrafficLedger::bytes_b_to_a, &TrafficLedger::phase3_b_to_a,
        repf.wire_size());
  SplitReply reply = decode_split_reply(repf);
  if (reply.items.size() != req.items.size())
    throw ProtocolError("finalize: reply item count mismatch");
  for (std::size_t i = 0; i < reply.items.size(); ++i) {
    if (reply.items[i].feature_id != req.items[i].feature_id ||
        reply.items[i].ordinal != req.items[i].ordinal)
      throw ProtocolError("finalize: reply does not match request order");
    pending[i]->split_value = reply.items[i].value;
    pending[i]->resolved = true;
  }
  return forest;
}

TrafficReport account_traffic(const TrafficLedger& ledger, std::size_t n, std::size_t m,
                              std::size_t r, int num_trees, int max_layers,
                              std::size_t domain_size) {
  TrafficReport rep;
  rep.phase1_bytes = ledger.phase1_b_to_a;
  rep.phase3_request_bytes = ledger.phase3_a_to_b;
  rep.phase3_reply_bytes = ledger.phase3_b_to_a;

  auto log2ceil = [](std::size_t v) {
    std::size_t bits = 0;
    std::size_t cap = 1;
    while (cap < v) {
      cap *= 2;
      ++bits;
    }
    return std::max<std::size_t>(bits, 1);
  };

  double fixed_denom = static_cast<double>(m) * r * n * 4.0;
  if (fixed_denom > 0) rep.phase1_fixed_ratio = rep.phase1_bytes / fixed_denom;
  double info_denom = static_cast<double>(m) * r * n * log2ceil(n) / 8.0;
  if (info_denom > 0) rep.phase1_info_ratio = rep.phase1_bytes / info_denom;

  std::uint64_t max_splits =
      static_cast<std::uint64_t>((1ull << max_layers) - 1) * static_cast<std::uint64_t>(num_trees);
  double phase3_info_denom =
      static_cast<double>(max_splits) * (log2ceil(n) + log2ceil(domain_size)) / 8.0;
  if (phase3_info_denom > 0)
    rep.phase3_info_ratio = rep.phase3_reply_bytes / phase3_info_denom;
  rep.phase3_fixed_bound = kFrameHeaderBytes + 4 + 12ull * max_splits;
  rep.phase3_within_bound = rep.phase3_reply_bytes <= rep.phase3_fixed_bound;
  return rep;
}

}  // namespace opboost
