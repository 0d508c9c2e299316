#pragma once

#include <optional>

#include "octest/tables.hpp"

namespace octest {

enum class ThresholdSource { FromTable, FromMeasure };

/// The randomness level a non-causal explanation of the table cannot
/// exceed. A randomness estimate above T warrants causal inference.
struct ThresholdResult {
  double T = 1.0;
  double phi_used = 0.0;
  ThresholdSource source = ThresholdSource::FromTable;
  std::optional<AssociationKind> measure;
};

/// T = 1 - |phi| from a full table.
ThresholdResult threshold_T(const Probs2x2& p);

/// sqrt(p_e(1-p_e) / (p_d(1-p_d))); scales a risk difference to phi.
double lambda_factor(double p_e, double p_d);

/// T from prevalences plus a single association measure. The odds-ratio
/// branch converts to relative risk first (plus-root quadratic); all
/// branches agree with threshold_T on the implied table.
ThresholdResult threshold_from_measure(const MarginalSummary& m);

/// l_eta / T; values above 1 mean the randomness evidence clears the bar.
double ample_randomness_ratio(double l_eta, const ThresholdResult& t);

}  // namespace octest
