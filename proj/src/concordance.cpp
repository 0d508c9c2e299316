#include "octest/concordance.hpp"

#include <cmath>

#include "octest/errors.hpp"

namespace octest {

namespace {

constexpr double kRadicandSlack = 1e-9;

}  // namespace

double pairwise_to_probandwise(double pc) {
  if (!(pc >= 0 && pc <= 1)) {
    throw DomainError("pairwise concordance must lie in [0,1]");
  }
  return 2 * pc / (1 + pc);
}

double r_squared_upper_bound(const ConcordanceEvidence& ev) {
  if (!(ev.value >= 0 && ev.value <= 1)) {
    throw DomainError("concordance must lie in [0,1]");
  }
  if (!(ev.prevalence > 0 && ev.prevalence < 1)) {
    throw DomainError("prevalence must lie in (0,1)");
  }
  double ratio;
  if (ev.kind == ConcordanceKind::Probandwise) {
    ratio = (1 - ev.value) / (1 - ev.prevalence);
  } else {
    ratio = (1 - ev.value) / ((1 + ev.value) * (1 - ev.prevalence));
  }
  double bound = 1 - ratio;
  if (bound < 0) {
    if (bound < -kRadicandSlack) {
      throw InconsistentEvidence(
          "concordance is below the chance level implied by the prevalence");
    }
    bound = 0;
  }
  return bound;
}

RandomnessBound lower_bound_eta(const ConcordanceEvidence& exposure,
                                const ConcordanceEvidence& outcome) {
  RandomnessBound b;
  b.r2_pi_upper = r_squared_upper_bound(exposure);
  b.r2_r_upper = r_squared_upper_bound(outcome);
  b.l_eta = 1 - std::sqrt(b.r2_pi_upper) * std::sqrt(b.r2_r_upper);
  return b;
}

CohortStats cohort_statistics(const TwinCohort& cohort) {
  const std::uint64_t n = cohort.pairs();
  if (n == 0) throw EmptyTable("cohort has no pairs");
  if (cohort.both == 0 && cohort.discordant == 0) {
    throw NoTraitPresent("no pair has the trait; concordance undefined");
  }
  CohortStats s;
  const double c = static_cast<double>(cohort.both);
  const double d = static_cast<double>(cohort.discordant);
  const double u = static_cast<double>(cohort.neither);
  const double dn = static_cast<double>(n);
  s.probandwise = 2 * c / (2 * c + d);
  s.pairwise = c / (c + d);
  s.v_concordance = (u + c) / dn;
  s.psi_bar = (c + d / 2) / dn;
  return s;
}

}  // namespace octest
