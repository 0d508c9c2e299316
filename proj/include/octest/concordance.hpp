#pragma once

#include <cstdint>

namespace octest {

enum class ConcordanceKind { Probandwise, Pairwise };

/// One twin-study concordance paired with the prevalence of the matching
/// trait in the analyzed population (P(e=1) for the exposure trait,
/// P(d=1) for the outcome trait).
struct ConcordanceEvidence {
  ConcordanceKind kind = ConcordanceKind::Probandwise;
  double value = 0;       // concordance in [0,1]
  double prevalence = 0;  // in (0,1)
};

/// Raw twin-pair counts: pairs where both / exactly one / neither twin has
/// the trait.
struct TwinCohort {
  std::uint64_t both = 0;        // C
  std::uint64_t discordant = 0;  // D~
  std::uint64_t neither = 0;     // U

  std::uint64_t pairs() const { return both + discordant + neither; }
};

struct CohortStats {
  double probandwise = 0;  // BC = 2C / (2C + D~)
  double pairwise = 0;     // PC = C / (C + D~)
  double v_concordance = 0;  // V = (U + C) / n
  double psi_bar = 0;        // trait prevalence (C + D~/2) / n
};

/// Empirical lower bound on the randomness from one concordance per trait.
struct RandomnessBound {
  double l_eta = 0;
  double r2_pi_upper = 0;  // upper bound on R^2 of the exposure propensity
  double r2_r_upper = 0;   // upper bound on R^2 of the expected prognosis
};

/// BC = 2 PC / (1 + PC); satisfies 1-BC = (1-PC)/(1+PC) exactly.
double pairwise_to_probandwise(double pc);

/// Single-trait bound on the coefficient of determination:
/// probandwise: 1 - (1-BC)/(1-P); pairwise: 1 - (1-PC)/((1+PC)(1-P)).
/// Radicands in [-1e-9, 0) are clipped to zero; anything more negative
/// means the concordance is inconsistent with the prevalence.
double r_squared_upper_bound(const ConcordanceEvidence& evidence);

/// l_eta = 1 - sqrt(bound_E) * sqrt(bound_D). The kinds may differ between
/// traits since the bound factors per trait.
RandomnessBound lower_bound_eta(const ConcordanceEvidence& exposure,
                                const ConcordanceEvidence& outcome);

/// BC, PC, V and the trait prevalence of one cohort.
CohortStats cohort_statistics(const TwinCohort& cohort);

}  // namespace octest
