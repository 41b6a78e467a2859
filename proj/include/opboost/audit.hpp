#pragma once

#include <optional>
#include <string>

#include "opboost/mechanisms.hpp"
#include "opboost/pmf.hpp"

namespace opboost {

// Result of an exhaustive worst-case ratio search over exact output
// distributions. No sampling anywhere: reruns are bit-identical.
struct AuditReport {
  std::string mechanism;
  int t = 0;
  int worst_x = 0;        // input achieving the worst ratio
  int worst_xp = 0;       // its neighbor
  int worst_o = 0;        // output achieving it
  double worst_log_ratio = 0.0;
  double claimed_bound = 0.0;  // exponent the mechanism claims
  double slack = 0.0;          // claimed_bound - worst_log_ratio
  bool passed = false;         // slack >= -1e-9
  // true when some audited pair had disjoint supports (possible only for
  // the deterministic-partition mechanism across partitions); such pairs
  // are excluded from the ratio max and surfaced here instead
  bool distinguishable_pairs = false;

  std::string csv_row() const;  // mechanism,t,worst_log_ratio,claimed_bound,slack,passed
};

inline constexpr double kAuditSlackTol = 1e-9;

std::string mechanism_name(MechanismKind kind);

// exact output distribution of the mechanism at input x, over the full
// mapped domain (zero mass where the mechanism cannot land)
Pmf exact_pmf(const MechanismSpec& spec, int x);

// worst log(Pr[o|x]/Pr[o|x']) over |x-x'| <= t, against the claimed
// exponent (default t*epsilon; t*epsilon_ner for the in-partition mechanism).
// claimed_override lets negative-control tests plant a bound that must fail.
AuditReport audit_dldp(const MechanismSpec& spec, int t,
                       std::optional<double> claimed_override = std::nullopt);

// same search, against ceil(t/theta)*eps_prt + theta*eps_ner
AuditReport audit_partition_dldp(const MechanismSpec& spec, int t);

// noise centered at a shifting input, truncated to the fixed window [l, u];
// claimed exponent 2*t/lambda. Centers sweep [l-span-10, u+span+10] unless
// an explicit center range is given.
AuditReport audit_bounded_dlap(double lambda, int l, int u, int t,
                               std::optional<std::pair<int, int>> centers = std::nullopt);

}  // namespace opboost
