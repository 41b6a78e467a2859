#include <cmath>
#include <sstream>

#include "doctest.h"
#include "opboost/audit.hpp"
#include "opboost/errors.hpp"

using namespace opboost;

namespace {
const double kTwoLn2 = 2.0 * std::log(2.0);

double pmf_sum(const Pmf& p) {
  double s = 0.0;
  for (double v : p.probs) s += v;
  return s;
}
}  // namespace

TEST_SUITE("audit") {
  TEST_CASE("exact_pmf reproduces the closed forms") {
    MappedDomain small = MappedDomain::create(1, 3, 1);
    MechanismSpec g = MechanismSpec::global_map(kTwoLn2, small);
    Pmf p = exact_pmf(g, 1);
    CHECK(p.at(1) == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
    CHECK(p.at(2) == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
    CHECK(p.at(3) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));

    MappedDomain d = MappedDomain::create(1, 10, 2);
    MechanismSpec loc;
    loc.kind = MechanismKind::LocalMap;
    loc.domain = d;
    loc.budget.epsilon_ner = kTwoLn2;
    Pmf lp = exact_pmf(loc, 3);
    CHECK(lp.at(3) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(lp.at(4) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    for (int o = 1; o <= 10; ++o)
      if (o != 3 && o != 4) CHECK(lp.at(o) == 0.0);

    MechanismSpec grr_spec = MechanismSpec::grr(std::log(2.0), MappedDomain::create(1, 3, 1));
    Pmf gp = exact_pmf(grr_spec, 2);
    CHECK(gp.at(2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gp.at(1) == doctest::Approx(0.25).epsilon(1e-12));
  }

  TEST_CASE("exact_pmf for the two-stage mechanism equals the brute-force composition") {
    MappedDomain d = MappedDomain::create(1, 10, 2);
    MechanismSpec adj = MechanismSpec::adj_map(1.0, 2.0, d);
    for (int x = 1; x <= 10; ++x) {
      Pmf got = exact_pmf(adj, x);
      Pmf part = adj_map_partition_pmf(x, adj.budget.epsilon_prt, d);
      std::vector<double> want(10, 0.0);
      for (int m = 1; m <= d.k; ++m) {
        auto [lo, hi] = d.partition_bounds(m);
        int c = std::clamp(x, lo, hi);
        Pmf inner = global_map_pmf(c, adj.budget.epsilon_ner, lo, hi);
        for (int o = lo; o <= hi; ++o)
          want[static_cast<std::size_t>(o - 1)] += part.at(m) * inner.at(o);
      }
      for (int o = 1; o <= 10; ++o)
        CHECK(got.at(o) == doctest::Approx(want[static_cast<std::size_t>(o - 1)]).epsilon(1e-12));
      CHECK(std::abs(pmf_sum(got) - 1.0) < 1e-12);
    }
  }

  TEST_CASE("full-domain ratio audit passes for the one-stage mechanism") {
    MappedDomain d = MappedDomain::create(1, 20, 4);
    MechanismSpec g = MechanismSpec::global_map(1.0, d);
    AuditReport r = audit_dldp(g, 3);
    CHECK(r.passed);
    CHECK(!r.distinguishable_pairs);
    CHECK(r.claimed_bound == doctest::Approx(3.0));
    CHECK(r.worst_log_ratio == doctest::Approx(1.885982341618).epsilon(1e-9));
    CHECK(r.slack == doctest::Approx(r.claimed_bound - r.worst_log_ratio));

    // worst ratio grows with the allowed pair distance
    double prev = 0.0;
    for (int t : {1, 3, 5, 10}) {
      AuditReport step = audit_dldp(g, t);
      CHECK(step.worst_log_ratio > prev);
      CHECK(step.passed);
      prev = step.worst_log_ratio;
    }
  }

  TEST_CASE("randomized-response audit is tight") {
    MechanismSpec g = MechanismSpec::grr(1.5, MappedDomain::create(1, 10, 2));
    AuditReport r1 = audit_dldp(g, 1);
    CHECK(r1.passed);
    // keep/flip ratio is e^eps: the worst log-ratio equals eps to the last bit
    CHECK(r1.worst_log_ratio == 1.5);
    AuditReport r3 = audit_dldp(g, 3);
    CHECK(r3.worst_log_ratio == 1.5);
    CHECK(r3.passed);
  }

  TEST_CASE("planted too-small claims are rejected") {
    MappedDomain d = MappedDomain::create(1, 20, 4);
    MechanismSpec g = MechanismSpec::global_map(1.0, d);
    AuditReport r = audit_dldp(g, 3, 0.5 * 3.0 * 1.0);
    CHECK(!r.passed);
    CHECK(r.slack < 0.0);
    CHECK(r.claimed_bound == doctest::Approx(1.5));
  }

  TEST_CASE("two-stage mechanism fails the plain-distance claim but passes its own") {
    MappedDomain d = MappedDomain::create(1, 20, 4);
    MechanismSpec adj = MechanismSpec::adj_map(1.0, 2.0, d);
    // at t=1 the partition step leaks more than e^{t*eps}: a real violation
    // the auditor must detect, not a planted one
    AuditReport plain = audit_dldp(adj, 1);
    CHECK(!plain.passed);
    CHECK(plain.worst_log_ratio == doctest::Approx(1.945172).epsilon(1e-5));
    // the two-budget accounting covers the same worst case with slack
    AuditReport part = audit_partition_dldp(adj, 1);
    CHECK(part.passed);
    CHECK(part.worst_log_ratio == doctest::Approx(plain.worst_log_ratio));
    double en = adj.budget.epsilon_ner, ep = adj.budget.epsilon_prt;
    CHECK(part.claimed_bound == doctest::Approx(1.0 * ep + 4.0 * en));

    for (double alpha : {0.5, 1.0, 2.0})
      for (int t : {1, 4, 9}) {
        MechanismSpec spec = MechanismSpec::adj_map(1.0, alpha, d);
        AuditReport r = audit_partition_dldp(spec, t);
        CHECK(r.passed);
        CHECK(r.claimed_bound == doctest::Approx(std::ceil(t / 4.0) * spec.budget.epsilon_prt +
                                                 4.0 * spec.budget.epsilon_ner));
      }

    CHECK_THROWS_AS(audit_partition_dldp(MechanismSpec::global_map(1.0, d), 2), ConfigError);
  }

  TEST_CASE("deterministic-partition audit surfaces distinguishable pairs") {
    MappedDomain d = MappedDomain::create(1, 20, 4);
    MechanismSpec loc = MechanismSpec::local_map(1.0, 2.0, d);
    AuditReport r = audit_dldp(loc, 3);
    CHECK(r.passed);
    CHECK(r.distinguishable_pairs);  // cross-partition pairs have disjoint supports
    CHECK(r.claimed_bound == doctest::Approx(3.0 * loc.budget.epsilon_ner));
    // within a partition of width 4 the max pair distance is 3 and the
    // normalizers cancel at the edges: worst ratio is exactly 3*eps_ner/2
    CHECK(r.worst_log_ratio == doctest::Approx(1.5 * loc.budget.epsilon_ner).epsilon(1e-9));
  }

  TEST_CASE("window-truncated noise audit") {
    AuditReport r1 = audit_bounded_dlap(1.0, -5, 5, 1);
    CHECK(r1.passed);
    CHECK(r1.claimed_bound == doctest::Approx(2.0));
    CHECK(r1.worst_log_ratio == doctest::Approx(1.209060321071).epsilon(1e-9));
    AuditReport r2 = audit_bounded_dlap(1.0, -5, 5, 2);
    CHECK(r2.passed);
    CHECK(r2.worst_log_ratio == doctest::Approx(2.276108589085).epsilon(1e-9));

    // centers entirely on one side of the window induce the same truncated
    // pmf: the worst ratio collapses to exactly zero
    AuditReport far = audit_bounded_dlap(1.0, 0, 10, 3, std::make_pair(-40, -25));
    CHECK(far.worst_log_ratio == 0.0);
    CHECK(far.passed);

    // a window so wide truncation never bites: the ratio is the untruncated
    // t/lambda, half the claimed exponent
    AuditReport wide = audit_bounded_dlap(2.0, -200, 200, 2, std::make_pair(-5, 5));
    CHECK(wide.worst_log_ratio == doctest::Approx(1.0).epsilon(1e-9));

    double prev = 0.0;
    for (int t = 1; t <= 6; ++t) {
      AuditReport r = audit_bounded_dlap(0.7, -4, 4, t);
      CHECK(r.worst_log_ratio > prev);
      CHECK(r.passed);
      prev = r.worst_log_ratio;
    }
  }

  TEST_CASE("report rows are machine-readable") {
    MechanismSpec g = MechanismSpec::grr(1.0, MappedDomain::create(1, 10, 2));
    AuditReport r = audit_dldp(g, 2);
    std::string row = r.csv_row();
    CHECK(row.substr(0, 4) == "grr,");
    int commas = 0;
    for (char c : row)
      if (c == ',') ++commas;
    CHECK(commas == 5);
    CHECK(row.find("true") != std::string::npos);
    CHECK(mechanism_name(MechanismKind::AdjMap) == "adj_map");
    CHECK(mechanism_name(MechanismKind::LocalMap) == "local_map");
  }
}
