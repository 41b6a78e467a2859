#include <cstdio>
#include <filesystem>
#include <limits>
#include <thread>

#include "doctest.h"
#include "opboost/domain.hpp"
#include "opboost/errors.hpp"
#include "opboost/fedproto.hpp"
#include "opboost/metrics.hpp"

using namespace opboost;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

RawFeature uniform_feature(std::uint32_t id, std::size_t n, SeededRng& rng) {
  RawFeature f;
  f.feature_id = id;
  f.name = "f" + std::to_string(id);
  f.lower = 0.0;
  f.upper = 100.0;
  for (std::size_t i = 0; i < n; ++i) f.values.push_back(rng.uniform() * 100.0);
  return f;
}

std::vector<double> to_doubles(const std::vector<int>& v) {
  return std::vector<double>(v.begin(), v.end());
}

}  // namespace

TEST_SUITE("fedproto") {
  TEST_CASE("prepare with infinite budget reduces to plain ranking") {
    MappedDomain d = MappedDomain::create(1, 16, 4);
    MechanismSpec spec = MechanismSpec::global_map(kInf, d);
    SeededRng rng(3);
    RawFeature f = uniform_feature(5, 40, rng);
    SeededRng prng(4);
    PreparedParty prep = partyB_prepare({f}, spec, prng);

    std::vector<int> mapped;
    for (double v : f.values) mapped.push_back(map_value(v, f.lower, f.upper, d));
    REQUIRE(prep.messages.size() == 1);
    CHECK(prep.messages[0].feature_id == 5);
    CHECK(prep.messages[0].ranks == ordinalize(mapped));
    CHECK(prep.desensitized[0] == mapped);
    for (std::size_t i = 0; i < mapped.size(); ++i)
      CHECK(prep.store.lookup(5, prep.messages[0].ranks[i]) == mapped[i]);
  }

  TEST_CASE("prepare is deterministic under a fixed seed") {
    MappedDomain d = MappedDomain::create(1, 16, 4);
    MechanismSpec spec = MechanismSpec::adj_map(1.0, 1.0, d);
    SeededRng data_rng(9);
    RawFeature f = uniform_feature(1, 60, data_rng);
    SeededRng r1(77), r2(77);
    PreparedParty a = partyB_prepare({f}, spec, r1);
    PreparedParty b = partyB_prepare({f}, spec, r2);
    CHECK(a.messages[0].ranks == b.messages[0].ranks);
    CHECK(a.desensitized == b.desensitized);
    CHECK(a.store.values == b.store.values);
  }

  TEST_CASE("rank fidelity rises with the privacy budget") {
    MappedDomain d = MappedDomain::create(1, 64, 4);
    SeededRng data_rng(12);
    RawFeature f = uniform_feature(0, 1000, data_rng);
    std::vector<int> mapped;
    for (double v : f.values) mapped.push_back(map_value(v, f.lower, f.upper, d));

    double prev = -2.0;
    for (double eps : {0.08, 0.32, 1.28, 5.12}) {
      MechanismSpec spec = MechanismSpec::adj_map(eps, 1.0, d);
      SeededRng rng(500);
      std::vector<int> desens = desensitize(mapped, spec, rng);
      double tau = weighted_kendall(to_doubles(mapped), to_doubles(desens));
      CHECK(tau >= prev - 0.02);  // monotone trend, minor sampling slack
      prev = tau;
    }
    CHECK(prev > 0.9);  // the largest budget nearly preserves the ranking
  }

  TEST_CASE("store survives a save/load cycle") {
    MappedDomain d = MappedDomain::create(1, 16, 4);
    MechanismSpec spec = MechanismSpec::adj_map(1.0, 1.0, d);
    SeededRng data_rng(1), prng(2);
    PreparedParty prep =
        partyB_prepare({uniform_feature(0, 30, data_rng), uniform_feature(3, 30, data_rng)},
                       spec, prng);
    std::string path =
        (std::filesystem::temp_directory_path() / "opboost_store_roundtrip.csv").string();
    prep.store.save_csv(path);
    PartyBStore loaded = PartyBStore::load_csv(path);
    CHECK(loaded.values == prep.store.values);
    std::remove(path.c_str());

    CHECK_THROWS_AS(prep.store.lookup(99, 1), ProtocolError);
    CHECK_THROWS_AS(PartyBStore::load_csv("/nonexistent/dir/store.csv"), DataError);
  }

  TEST_CASE("training with only local features matches the centralized path") {
    std::vector<int> c0 = {5, 1, 9, 2, 7, 3, 8, 4, 6, 10};
    std::vector<int> c1 = {2, 4, 6, 8, 10, 1, 3, 5, 7, 9};
    std::vector<double> labels = {0, 0, 1, 0, 1, 0, 1, 0, 1, 1};
    BoostParams p;
    p.num_trees = 15;

    PartialForest fed = partyA_train({}, {{0, c0}, {1, c1}}, labels, p);
    CHECK(fed.fully_resolved());

    OrdinalDataset ds;
    ds.n = labels.size();
    ds.labels = labels;
    ds.features = {ordinalize(c0), ordinalize(c1)};
    PartialForest central = train(ds, p);
    resolve_with_columns(central, {c0, c1}, {ordinalize(c0), ordinalize(c1)});
    CHECK(serialize_forest(fed) == serialize_forest(central));
    for (int v0 : {1, 5, 10})
      for (int v1 : {2, 7})
        CHECK(predict(fed, {v0, v1}) == predict(central, {v0, v1}));
  }

  TEST_CASE("training rejects inconsistent inputs") {
    std::vector<double> labels = {0, 1, 0, 1};
    BoostParams p;
    FeatureMessage short_msg;
    short_msg.feature_id = 0;
    short_msg.ranks = {1, 2, 3};
    CHECK_THROWS_AS(partyA_train({short_msg}, {}, labels, p), ProtocolError);

    FeatureMessage ok;
    ok.feature_id = 0;
    ok.ranks = {2, 1, 4, 3};
    FeatureMessage dup = ok;
    CHECK_THROWS_AS(partyA_train({ok, dup}, {}, labels, p), ProtocolError);
    CHECK_THROWS_AS(partyA_train({ok}, {{0, {1, 2, 3, 4}}}, labels, p), ProtocolError);

    FeatureMessage repeat_rank;
    repeat_rank.feature_id = 1;
    repeat_rank.ranks = {1, 1, 2, 3};
    CHECK_THROWS_AS(partyA_train({repeat_rank}, {}, labels, p), ProtocolError);
    FeatureMessage zero_rank;
    zero_rank.feature_id = 2;
    zero_rank.ranks = {0, 1, 2, 3};
    CHECK_THROWS_AS(partyA_train({zero_rank}, {}, labels, p), ProtocolError);
  }

  TEST_CASE("full two-party round trip over the loopback channel") {
    const std::size_t n = 80;
    MappedDomain d = MappedDomain::create(1, 32, 4);
    MechanismSpec spec = MechanismSpec::adj_map(2.0, 1.0, d);
    SeededRng data_rng(31), prng(32);
    std::vector<RawFeature> raw = {uniform_feature(0, n, data_rng),
                                   uniform_feature(1, n, data_rng)};
    PreparedParty prep = partyB_prepare(raw, spec, prng);

    auto [a_end, b_end] = make_loopback();
    TrafficLedger la, lb;
    send_features(*b_end, prep.messages, &lb);
    std::vector<FeatureMessage> received = recv_features(*a_end, 2, &la);
    CHECK(la.phase1_b_to_a == 2 * (17 + 4 * n));
    CHECK(lb.phase1_b_to_a == la.phase1_b_to_a);
    CHECK(received[0].ranks == prep.messages[0].ranks);

    // A-side local feature and labels correlated with B feature 0
    std::vector<int> local(n);
    std::vector<double> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      local[i] = static_cast<int>(i % 13) + 1;
      labels[i] = raw[0].values[i] * 0.01 + (i % 13) * 0.05;
    }
    BoostParams p;
    p.num_trees = 10;
    PartialForest forest = partyA_train(received, {{7, local}}, labels, p);

    std::size_t unresolved = 0;
    for (const Tree& t : forest.trees)
      for (const auto& [id, nd] : t.nodes)
        if (!nd.is_leaf && !nd.resolved) ++unresolved;
    REQUIRE(unresolved > 0);  // B features must actually get used

    std::thread server(
        [&, b = b_end.get()]() { partyB_serve(*b, prep.store, &lb); });
    PartialForest resolved = finalize(std::move(forest), *a_end, &la);
    server.join();
    CHECK(resolved.fully_resolved());
    CHECK(la.phase3_a_to_b == 13 + 8 * unresolved);
    CHECK(la.phase3_b_to_a == 13 + 12 * unresolved);
    CHECK(lb.phase3_a_to_b == la.phase3_a_to_b);
    CHECK(lb.phase3_b_to_a == la.phase3_b_to_a);

    // resolved values must be exactly what B stored
    for (const Tree& t : resolved.trees)
      for (const auto& [id, nd] : t.nodes)
        if (!nd.is_leaf && nd.feature_id < 2)
          CHECK(nd.split_value ==
                prep.store.lookup(static_cast<std::uint32_t>(nd.feature_id), nd.split_ordinal));
  }

  TEST_CASE("a fully-resolved forest still completes the empty exchange") {
    auto [a_end, b_end] = make_loopback();
    TrafficLedger la, lb;
    PartyBStore empty_store;
    PartialForest forest = partyA_train({}, {{0, {3, 1, 2, 4}}}, {0, 1, 1, 0}, BoostParams{});
    CHECK(forest.fully_resolved());
    std::thread server([&, b = b_end.get()]() { partyB_serve(*b, empty_store, &lb); });
    PartialForest out = finalize(std::move(forest), *a_end, &la);
    server.join();
    CHECK(out.fully_resolved());
    CHECK(la.phase3_a_to_b == 13);  // count field only
    CHECK(la.phase3_b_to_a == 13);
  }

  TEST_CASE("replies that break the request contract are rejected") {
    MappedDomain d = MappedDomain::create(1, 16, 4);
    MechanismSpec spec = MechanismSpec::adj_map(1.0, 1.0, d);
    SeededRng data_rng(41), prng(42);
    PreparedParty prep = partyB_prepare({uniform_feature(0, 50, data_rng)}, spec, prng);

    // labels keyed to B's own desensitized values guarantee useful splits
    std::vector<double> labels(50);
    for (std::size_t i = 0; i < 50; ++i) labels[i] = prep.desensitized[0][i] > 8 ? 1.0 : 0.0;
    BoostParams p;
    p.num_trees = 3;
    PartialForest forest = partyA_train(prep.messages, {}, labels, p);
    REQUIRE(!forest.fully_resolved());

    SUBCASE("reply answering a different ordinal") {
      auto [a_end, b_end] = make_loopback();
      std::thread server([&, b = b_end.get()]() {
        Frame f = recv_frame(*b);
        SplitRequest req = decode_split_request(f);
        SplitReply rep;
        for (const auto& it : req.items) rep.items.push_back({it.feature_id, it.ordinal, 1});
        rep.items.front().ordinal += 1;
        send_frame(*b, to_frame(rep));
      });
      CHECK_THROWS_AS(finalize(std::move(forest), *a_end, nullptr), ProtocolError);
      server.join();
    }

    SUBCASE("short reply") {
      auto [a_end, b_end] = make_loopback();
      std::thread server([b = b_end.get()]() {
        recv_frame(*b);
        send_frame(*b, to_frame(SplitReply{}));
      });
      CHECK_THROWS_AS(finalize(std::move(forest), *a_end, nullptr), ProtocolError);
      server.join();
    }
  }

  TEST_CASE("traffic accounting ratios") {
    TrafficLedger ledger;
    ledger.phase1_b_to_a = 2 * (17 + 4 * 1000);
    ledger.phase3_a_to_b = 13 + 8 * 20;
    ledger.phase3_b_to_a = 13 + 12 * 20;
    TrafficReport rep = account_traffic(ledger, 1000, 2, 1, 5, 3, 64);
    CHECK(rep.phase1_bytes == 8034);
    CHECK(rep.phase1_fixed_ratio == doctest::Approx(8034.0 / 8000.0));
    // 1000 samples need 10 bits per rank
    CHECK(rep.phase1_info_ratio == doctest::Approx(8034.0 / (2.0 * 1000.0 * 10.0 / 8.0)));
    // 5 trees, <=7 splits each, 10+6 bits per (ordinal, value) pair
    CHECK(rep.phase3_info_ratio == doctest::Approx(253.0 / (35.0 * 16.0 / 8.0)));
    CHECK(rep.phase3_fixed_bound == 13 + 12 * 35);
    CHECK(rep.phase3_within_bound);

    ledger.phase3_b_to_a = 13 + 12 * 36;  // one item over the cap
    TrafficReport over = account_traffic(ledger, 1000, 2, 1, 5, 3, 64);
    CHECK(!over.phase3_within_bound);
  }

  TEST_CASE("loopback receives time out instead of hanging") {
    auto [a_end, b_end] = make_loopback(0.05);
    CHECK_THROWS_AS(recv_frame(*a_end), ProtocolError);
  }

  TEST_CASE("tcp transport carries the same protocol") {
    TcpListener listener("127.0.0.1", 0);
    PartyBStore store;
    store.values[{1, 1}] = 42;
    std::thread server([&listener, &store]() {
      auto ch = listener.accept_one();
      partyB_serve(*ch, store, nullptr);
    });

    auto client = TcpChannel::connect("127.0.0.1", listener.port());
    PartialForest forest;
    Tree t;
    TreeNode root;
    root.is_leaf = false;
    root.feature_id = 1;
    root.split_ordinal = 1;
    t.nodes[1] = root;
    TreeNode leaf;
    leaf.is_leaf = true;
    t.nodes[2] = leaf;
    t.nodes[3] = leaf;
    forest.trees.push_back(t);
    PartialForest resolved = finalize(std::move(forest), *client, nullptr);
    server.join();
    CHECK(resolved.fully_resolved());
    CHECK(resolved.trees[0].nodes[1].split_value == 42);

    // nobody listening: connect gives up after its deadline
    CHECK_THROWS_AS(TcpChannel::connect("127.0.0.1", 1, 0.2), ProtocolError);
  }
}
