#include "octest/tables.hpp"

#include <algorithm>
#include <cmath>

namespace octest {

namespace {

constexpr double kSimplexTol = 1e-12;
constexpr double kInteriorTol = 1e-12;

Probs2x2 checked(double p01, double p11, double p00, double p10) {
  const double sum = p01 + p11 + p00 + p10;
  if (std::abs(sum - 1.0) > kSimplexTol) {
    throw DomainError("cell probabilities must sum to 1");
  }
  if (p01 <= 0 || p11 <= 0 || p00 <= 0 || p10 <= 0) {
    throw ZeroCell("every cell probability must be positive");
  }
  Probs2x2 p{p01, p11, p00, p10};
  if (p.p_e() <= 0 || p.p_e() >= 1 || p.p_d() <= 0 || p.p_d() >= 1) {
    throw DegenerateMarginal("marginals must lie strictly inside (0,1)");
  }
  return p;
}

}  // namespace

std::string to_string(AssociationKind kind) {
  switch (kind) {
    case AssociationKind::Phi: return "phi";
    case AssociationKind::RiskDifference: return "rd";
    case AssociationKind::RelativeRisk: return "rr";
    case AssociationKind::OddsRatio: return "or";
  }
  return "unknown";
}

AssociationKind association_kind_from_string(const std::string& name) {
  if (name == "phi") return AssociationKind::Phi;
  if (name == "rd") return AssociationKind::RiskDifference;
  if (name == "rr") return AssociationKind::RelativeRisk;
  if (name == "or") return AssociationKind::OddsRatio;
  throw DomainError("unknown association measure: " + name);
}

std::uint64_t StratifiedTable::total() const {
  std::uint64_t n = 0;
  for (const auto& s : strata) n += s.counts.total();
  return n;
}

Counts2x2 StratifiedTable::pooled() const {
  Counts2x2 out;
  for (const auto& s : strata) {
    out.x01 += s.counts.x01;
    out.x11 += s.counts.x11;
    out.x00 += s.counts.x00;
    out.x10 += s.counts.x10;
  }
  return out;
}

double StratifiedTable::weight(std::size_t i) const {
  return static_cast<double>(strata.at(i).counts.total()) /
         static_cast<double>(total());
}

Probs2x2 from_counts(const Counts2x2& counts) {
  const std::uint64_t n = counts.total();
  if (n == 0) throw EmptyTable("table has no observations");
  if (counts.x01 == 0 || counts.x11 == 0 || counts.x00 == 0 ||
      counts.x10 == 0) {
    throw ZeroCell("every cell count must be positive");
  }
  const double dn = static_cast<double>(n);
  return Probs2x2{counts.x01 / dn, counts.x11 / dn, counts.x00 / dn,
                  counts.x10 / dn};
}

Probs2x2 from_counts_haldane(const Counts2x2& counts) {
  if (counts.total() == 0) throw EmptyTable("table has no observations");
  const double dn = static_cast<double>(counts.total()) + 2.0;
  return Probs2x2{(counts.x01 + 0.5) / dn, (counts.x11 + 0.5) / dn,
                  (counts.x00 + 0.5) / dn, (counts.x10 + 0.5) / dn};
}

Probs2x2 make_probs(double p01, double p11, double p00, double p10) {
  return checked(p01, p11, p00, p10);
}

double phi(const Probs2x2& p) {
  const double pe = p.p_e();
  const double pd = p.p_d();
  if (pe <= 0 || pe >= 1 || pd <= 0 || pd >= 1) {
    throw DegenerateMarginal("phi needs both marginals inside (0,1)");
  }
  return (p.p11 * p.p00 - p.p01 * p.p10) /
         std::sqrt(pe * (1 - pe) * pd * (1 - pd));
}

Measures measures(const Probs2x2& p) {
  if (p.p01 <= 0 || p.p11 <= 0 || p.p00 <= 0 || p.p10 <= 0) {
    throw ZeroCell("association measures need all cells positive");
  }
  const double risk1 = p.p11 / (p.p11 + p.p10);
  const double risk0 = p.p01 / (p.p01 + p.p00);
  Measures m;
  m.rd = risk1 - risk0;
  m.rr = risk1 / risk0;
  m.odds_ratio = (p.p11 * p.p00) / (p.p10 * p.p01);
  return m;
}

double adjusted_rr(const StratifiedTable& table) {
  if (table.strata.empty()) throw EmptyTable("no strata");
  double num = 0;
  double den = 0;
  for (const auto& s : table.strata) {
    const auto& c = s.counts;
    const double n = static_cast<double>(c.total());
    if (c.exposed() == 0 || c.unexposed() == 0) {
      throw DegenerateStratum("stratum '" + s.label +
                              "' lacks exposed or unexposed subjects");
    }
    num += static_cast<double>(c.x11) * static_cast<double>(c.unexposed()) / n;
    den += static_cast<double>(c.x01) * static_cast<double>(c.exposed()) / n;
  }
  if (den == 0) {
    throw DegenerateStratum("no outcome events among the unexposed");
  }
  return num / den;
}

double rr_from_odds_ratio(double p_e, double p_d, double odds_ratio) {
  // Plus root of p_e*RR^2 + a*RR + m = 0; the minus root would map OR=1 to
  // a negative RR. The discriminant is computed in its explicitly
  // nonnegative form a^2 + 4 p_e (1-p_e) OR to avoid cancellation.
  const double a = p_d * (odds_ratio - 1) + (1 - p_e) - p_e * odds_ratio;
  const double disc = a * a + 4 * p_e * (1 - p_e) * odds_ratio;
  if (disc < 0) throw DomainError("negative discriminant in OR conversion");
  return (-a + std::sqrt(disc)) / (2 * p_e);
}

Probs2x2 implied_probs(const MarginalSummary& s) {
  if (s.p_e <= 0 || s.p_e >= 1 || s.p_d <= 0 || s.p_d >= 1) {
    throw DomainError("prevalences must lie in (0,1)");
  }
  // Reduce every measure to the risk difference, then to the p11 cell.
  double rd = 0;
  switch (s.kind) {
    case AssociationKind::Phi:
      rd = s.value * std::sqrt(s.p_d * (1 - s.p_d) / (s.p_e * (1 - s.p_e)));
      break;
    case AssociationKind::RiskDifference:
      rd = s.value;
      break;
    case AssociationKind::RelativeRisk:
      rd = s.p_d * (s.value - 1) / (1 + s.p_e * (s.value - 1));
      break;
    case AssociationKind::OddsRatio: {
      const double rr = rr_from_odds_ratio(s.p_e, s.p_d, s.value);
      rd = s.p_d * (rr - 1) / (1 + s.p_e * (rr - 1));
      break;
    }
  }
  const double p11 = s.p_e * s.p_d + rd * s.p_e * (1 - s.p_e);
  const double p10 = s.p_e - p11;
  const double p01 = s.p_d - p11;
  const double p00 = 1 - s.p_e - s.p_d + p11;
  if (p11 <= kInteriorTol || p10 <= kInteriorTol || p01 <= kInteriorTol ||
      p00 <= kInteriorTol) {
    throw Infeasible("(p_e, p_d, " + to_string(s.kind) +
                     ") does not correspond to an interior table");
  }
  return Probs2x2{p01, p11, p00, p10};
}

}  // namespace octest
