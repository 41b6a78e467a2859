#include "opboost/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "opboost/errors.hpp"

namespace opboost {

std::string mechanism_name(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::GlobalMap: return "global_map";
    case MechanismKind::AdjMap: return "adj_map";
    case MechanismKind::LocalMap: return "local_map";
    case MechanismKind::GRR: return "grr";
  }
  return "unknown";
}

std::string AuditReport::csv_row() const {
  std::ostringstream os;
  os.precision(12);
  os << mechanism << ',' << t << ',' << worst_log_ratio << ',' << claimed_bound << ','
     << slack << ',' << (passed ? "true" : "false");
  return os.str();
}

Pmf exact_pmf(const MechanismSpec& spec, int x) {
  const MappedDomain& d = spec.domain;
  if (!d.contains(x)) throw DataError("exact_pmf: value outside domain");
  switch (spec.kind) {
    case MechanismKind::GlobalMap:
      return global_map_pmf(x, spec.budget.epsilon, d.L, d.R);
    case MechanismKind::GRR:
      return grr_pmf(x, spec.budget.epsilon, d.L, d.R);
    case MechanismKind::LocalMap: {
      auto [lo, hi] = d.partition_bounds(d.home_partition(x));
      Pmf inner = global_map_pmf(x, spec.budget.epsilon_ner, lo, hi);
      Pmf full;
      full.lo = d.L;
      full.probs.assign(static_cast<std::size_t>(d.size()), 0.0);
      for (int o = lo; o <= hi; ++o)
        full.probs[static_cast<std::size_t>(o - d.L)] = inner.at(o);
      return full;
    }
    case MechanismKind::AdjMap: {
      Pmf part = adj_map_partition_pmf(x, spec.budget.epsilon_prt, d);
      Pmf full;
      full.lo = d.L;
      full.probs.assign(static_cast<std::size_t>(d.size()), 0.0);
      for (int m = 1; m <= d.k; ++m) {
        double pm = part.at(m);
        if (pm == 0.0) continue;
        auto [lo, hi] = d.partition_bounds(m);
        int c = std::clamp(x, lo, hi);
        Pmf inner = global_map_pmf(c, spec.budget.epsilon_ner, lo, hi);
        for (int o = lo; o <= hi; ++o)
          full.probs[static_cast<std::size_t>(o - d.L)] += pm * inner.at(o);
      }
      return full;
    }
  }
  throw ConfigError("exact_pmf: unsupported mechanism");
}

namespace {

// exhaustive max over pairs at distance <= t and all outputs; pairs with
// disjoint supports are excluded from the max and flagged
void ratio_search(const MechanismSpec& spec, int t, AuditReport& rep) {
  const MappedDomain& d = spec.domain;
  std::vector<Pmf> pmfs;
  pmfs.reserve(static_cast<std::size_t>(d.size()));
  for (int x = d.L; x <= d.R; ++x) pmfs.push_back(exact_pmf(spec, x));

  rep.worst_log_ratio = -std::numeric_limits<double>::infinity();
  for (int x = d.L; x <= d.R; ++x) {
    for (int xp = std::max(d.L, x - t); xp <= std::min(d.R, x + t); ++xp) {
      if (xp == x) continue;
      const Pmf& px = pmfs[static_cast<std::size_t>(x - d.L)];
      const Pmf& pxp = pmfs[static_cast<std::size_t>(xp - d.L)];
      for (int o = d.L; o <= d.R; ++o) {
        double a = px.at(o);
        double b = pxp.at(o);
        if (a == 0.0) continue;
        if (b == 0.0) {
          // support the first pmf reaches but the second cannot
          rep.distinguishable_pairs = true;
          continue;
        }
        double lr = std::log(a) - std::log(b);
        if (lr > rep.worst_log_ratio) {
          rep.worst_log_ratio = lr;
          rep.worst_x = x;
          rep.worst_xp = xp;
          rep.worst_o = o;
        }
      }
    }
  }
}

void finish(AuditReport& rep) {
  rep.slack = rep.claimed_bound - rep.worst_log_ratio;
  rep.passed = rep.slack >= -kAuditSlackTol;
}

}  // namespace

AuditReport audit_dldp(const MechanismSpec& spec, int t, std::optional<double> claimed_override) {
  if (t < 1) throw ConfigError("audit_dldp: t must be positive");
  AuditReport rep;
  rep.mechanism = mechanism_name(spec.kind);
  rep.t = t;
  ratio_search(spec, t, rep);
  double eps = spec.kind == MechanismKind::LocalMap ? spec.budget.epsilon_ner
                                                    : spec.budget.epsilon;
  rep.claimed_bound = claimed_override.value_or(t * eps);
  finish(rep);
  return rep;
}

AuditReport audit_partition_dldp(const MechanismSpec& spec, int t) {
  if (spec.kind != MechanismKind::AdjMap)
    throw ConfigError("audit_partition_dldp: mechanism has no partition budget");
  if (t < 1) throw ConfigError("audit_partition_dldp: t must be positive");
  AuditReport rep;
  rep.mechanism = mechanism_name(spec.kind);
  rep.t = t;
  ratio_search(spec, t, rep);
  int theta = spec.domain.theta;
  double crossings = static_cast<double>((t + theta - 1) / theta);  // ceil(t/theta)
  rep.claimed_bound = crossings * spec.budget.epsilon_prt + theta * spec.budget.epsilon_ner;
  finish(rep);
  return rep;
}

AuditReport audit_bounded_dlap(double lambda, int l, int u, int t,
                               std::optional<std::pair<int, int>> centers) {
  if (l > u) throw ConfigError("audit_bounded_dlap: l > u");
  if (t < 1) throw ConfigError("audit_bounded_dlap: t must be positive");
  int span = u - l;
  int clo = centers ? centers->first : l - span - 10;
  int chi = centers ? centers->second : u + span + 10;
  if (clo > chi) throw ConfigError("audit_bounded_dlap: empty center range");

  std::vector<Pmf> pmfs;
  pmfs.reserve(static_cast<std::size_t>(chi - clo + 1));
  for (int c = clo; c <= chi; ++c) {
    // output pmf of center c truncated to the absolute window [l, u]
    Pmf win = bounded_dlap_pmf(lambda, l - c, u - c);
    win.lo = l;
    pmfs.push_back(std::move(win));
  }

  AuditReport rep;
  rep.mechanism = "bounded_dlap";
  rep.t = t;
  rep.worst_log_ratio = -std::numeric_limits<double>::infinity();
  for (int c = clo; c <= chi; ++c) {
    for (int cp = std::max(clo, c - t); cp <= std::min(chi, c + t); ++cp) {
      if (cp == c) continue;
      const Pmf& pa = pmfs[static_cast<std::size_t>(c - clo)];
      const Pmf& pb = pmfs[static_cast<std::size_t>(cp - clo)];
      for (int o = l; o <= u; ++o) {
        double a = pa.at(o);
        double b = pb.at(o);
        if (a == 0.0 || b == 0.0) continue;  // deep-tail underflow only
        double lr = std::log(a) - std::log(b);
        if (lr > rep.worst_log_ratio) {
          rep.worst_log_ratio = lr;
          rep.worst_x = c;
          rep.worst_xp = cp;
          rep.worst_o = o;
        }
      }
    }
  }
  rep.claimed_bound = 2.0 * t / lambda;
  finish(rep);
  return rep;
}

}  // namespace opboost
