#include "octest/threshold.hpp"

#include <cmath>

#include "octest/errors.hpp"

namespace octest {

ThresholdResult threshold_T(const Probs2x2& p) {
  ThresholdResult r;
  r.phi_used = phi(p);
  r.T = 1.0 - std::abs(r.phi_used);
  r.source = ThresholdSource::FromTable;
  return r;
}

double lambda_factor(double p_e, double p_d) {
  if (!(p_e > 0 && p_e < 1) || !(p_d > 0 && p_d < 1)) {
    throw DomainError("lambda needs prevalences in (0,1)");
  }
  return std::sqrt(p_e * (1 - p_e) / (p_d * (1 - p_d)));
}

ThresholdResult threshold_from_measure(const MarginalSummary& m) {
  // Feasibility first: the triple must describe an interior table.
  (void)implied_probs(m);

  const double lambda = lambda_factor(m.p_e, m.p_d);
  double rd = 0;
  switch (m.kind) {
    case AssociationKind::Phi: {
      ThresholdResult r;
      r.phi_used = m.value;
      r.T = 1.0 - std::abs(m.value);
      r.source = ThresholdSource::FromMeasure;
      r.measure = m.kind;
      return r;
    }
    case AssociationKind::RiskDifference:
      rd = m.value;
      break;
    case AssociationKind::RelativeRisk:
      rd = m.p_d * (m.value - 1) / (1 + m.p_e * (m.value - 1));
      break;
    case AssociationKind::OddsRatio: {
      const double rr = rr_from_odds_ratio(m.p_e, m.p_d, m.value);
      rd = m.p_d * (rr - 1) / (1 + m.p_e * (rr - 1));
      break;
    }
  }
  ThresholdResult r;
  r.phi_used = rd * lambda;
  r.T = 1.0 - std::abs(r.phi_used);
  r.source = ThresholdSource::FromMeasure;
  r.measure = m.kind;
  return r;
}

double ample_randomness_ratio(double l_eta, const ThresholdResult& t) {
  if (t.T <= 0) throw ZeroThreshold("threshold is zero");
  return l_eta / t.T;
}

}  // namespace octest
