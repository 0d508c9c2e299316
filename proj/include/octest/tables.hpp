#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "octest/errors.hpp"

namespace octest {

/// Observed frequency counts of a binary exposure e and binary outcome d.
///
/// Cell order is (x01, x11, x00, x10) where the first index is e and the
/// second is d: x01 counts (e=0,d=1), x11 counts (e=1,d=1), x00 counts
/// (e=0,d=0), x10 counts (e=1,d=0). Published tables are often printed
/// transposed; inputs here are always in this order.
struct Counts2x2 {
  std::uint64_t x01 = 0;
  std::uint64_t x11 = 0;
  std::uint64_t x00 = 0;
  std::uint64_t x10 = 0;

  std::uint64_t total() const { return x01 + x11 + x00 + x10; }
  std::uint64_t exposed() const { return x11 + x10; }
  std::uint64_t unexposed() const { return x01 + x00; }
  std::uint64_t with_outcome() const { return x01 + x11; }
};

/// Relative frequencies on the open 3-simplex; every cell strictly positive.
struct Probs2x2 {
  double p01 = 0;
  double p11 = 0;
  double p00 = 0;
  double p10 = 0;

  double p_e() const { return p11 + p10; }
  double p_d() const { return p01 + p11; }
};

enum class AssociationKind { Phi, RiskDifference, RelativeRisk, OddsRatio };

std::string to_string(AssociationKind kind);
AssociationKind association_kind_from_string(const std::string& name);

/// Prevalences plus one association measure; enough to reconstruct a table.
struct MarginalSummary {
  double p_e = 0;
  double p_d = 0;
  AssociationKind kind = AssociationKind::Phi;
  double value = 0;
};

struct Measures {
  double rd = 0;
  double rr = 0;
  double odds_ratio = 0;
};

/// Counts keyed by covariate level; weights are stratum share of the total.
struct Stratum {
  std::string label;
  Counts2x2 counts;
};

struct StratifiedTable {
  std::vector<Stratum> strata;

  std::uint64_t total() const;
  Counts2x2 pooled() const;
  double weight(std::size_t i) const;
};

/// Cell counts to relative frequencies. Requires every cell > 0 so that
/// downstream denominators cannot vanish.
Probs2x2 from_counts(const Counts2x2& counts);

/// Validates an externally assembled probability vector (simplex within
/// 1e-12, all cells positive, interior marginals).
Probs2x2 make_probs(double p01, double p11, double p00, double p10);

/// Pearson correlation of the two binary indicators.
double phi(const Probs2x2& p);

/// Risk difference, relative risk and odds ratio of one table.
Measures measures(const Probs2x2& p);

/// Mantel-Haenszel pooled relative risk across strata.
double adjusted_rr(const StratifiedTable& table);

/// Reconstructs the full table implied by (p_e, p_d, measure). Throws
/// Infeasible when the triple does not correspond to an interior table.
Probs2x2 implied_probs(const MarginalSummary& summary);

/// Converts an odds ratio to the relative risk of the same table via the
/// plus root of the defining quadratic (the root with RR=1 at OR=1).
double rr_from_odds_ratio(double p_e, double p_d, double odds_ratio);

/// Haldane-Anscombe continuity correction: +0.5 to every cell, returned as
/// probabilities. CLI-layer convenience for tables with empty cells.
Probs2x2 from_counts_haldane(const Counts2x2& counts);

}  // namespace octest
