#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "opboost/boost.hpp"
#include "opboost/mechanisms.hpp"
#include "opboost/transport.hpp"
#include "opboost/wire.hpp"

namespace opboost {

// Two-party workflow. Party B holds raw features; Party A holds labels.
// Phase 1: B maps, desensitizes, ranks its features, keeps the desensitized
//          values at home, and ships only the rank columns.
// Phase 2: A trains on ranks; B-feature split nodes stay ordinal-only.
// Phase 3: A asks B for the desensitized values of just the split ordinals.
// A never sees raw or mapped-but-undesensitized data, and B can go offline
// between phases (the store file is all the state it needs).

struct RawFeature {
  std::uint32_t feature_id = 0;
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  std::vector<double> values;
};

// B-side persistent store: (feature_id, ordinal) -> desensitized value
struct PartyBStore {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::int32_t> values;

  std::int32_t lookup(std::uint32_t feature_id, std::uint32_t ordinal) const;
  void save_csv(const std::string& path) const;  // feature_id,ordinal,value
  static PartyBStore load_csv(const std::string& path);
};

struct PreparedParty {
  std::vector<FeatureMessage> messages;
  PartyBStore store;
  std::vector<std::vector<int>> desensitized;  // per feature, B-side only
};

PreparedParty partyB_prepare(const std::vector<RawFeature>& features,
                             const MechanismSpec& spec, SeededRng& rng);

// payload-level byte accounting; frame bytes included, transport framing
// (TCP/IP headers etc.) excluded
struct TrafficLedger {
  std::uint64_t bytes_a_to_b = 0;
  std::uint64_t bytes_b_to_a = 0;
  std::uint64_t phase1_b_to_a = 0;
  std::uint64_t phase3_a_to_b = 0;
  std::uint64_t phase3_b_to_a = 0;
};

void send_features(ByteChannel& ch, const std::vector<FeatureMessage>& msgs,
                   TrafficLedger* ledger);
std::vector<FeatureMessage> recv_features(ByteChannel& ch, std::size_t count,
                                          TrafficLedger* ledger);

struct LocalFeature {
  std::uint32_t feature_id = 0;
  std::vector<int> values;  // already mapped into the shared domain
};

// trains on the union of B rank columns and A-local columns; A-feature nodes
// come back resolved, B-feature nodes carry ordinals awaiting phase 3
PartialForest partyA_train(const std::vector<FeatureMessage>& messages,
                           const std::vector<LocalFeature>& local_features,
                           const std::vector<double>& labels, const BoostParams& params);

// answers exactly one split request from the store
void partyB_serve(ByteChannel& ch, const PartyBStore& store, TrafficLedger* ledger);

// one request/reply round trip filling every unresolved node
PartialForest finalize(PartialForest forest, ByteChannel& ch, TrafficLedger* ledger);

struct TrafficReport {
  std::uint64_t phase1_bytes = 0;
  std::uint64_t phase3_request_bytes = 0;
  std::uint64_t phase3_reply_bytes = 0;
  double phase1_fixed_ratio = 0.0;  // phase1 / (m*r*n*4)
  double phase1_info_ratio = 0.0;   // phase1 / (m*r*n*ceil(log2 n)/8)
  double phase3_info_ratio = 0.0;   // reply / ((2^L-1)*T*(ceil(log2 n)+ceil(log2 D))/8)
  std::uint64_t phase3_fixed_bound = 0;  // frame header + 12*(2^L-1)*T
  bool phase3_within_bound = false;
};

TrafficReport account_traffic(const TrafficLedger& ledger, std::size_t n, std::size_t m,
                              std::size_t r, int num_trees, int max_layers,
                              std::size_t domain_size);

}  // namespace opboost
