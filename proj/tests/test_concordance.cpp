#include <doctest.h>

#include <cmath>
#include <random>

#include "octest/concordance.hpp"
#include "octest/errors.hpp"

using namespace octest;

TEST_SUITE("concordance") {

TEST_CASE("pairwise to probandwise conversion") {
  CHECK(pairwise_to_probandwise(0.0) == 0.0);
  CHECK(pairwise_to_probandwise(1.0) == 1.0);
  CHECK_THROWS_AS(pairwise_to_probandwise(1.5), DomainError);
  // For any cohort: PC = C/(C+D) converts to BC = 2C/(2C+D) exactly.
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const double c = static_cast<double>(1 + rng() % 1000);
    const double d = static_cast<double>(1 + rng() % 1000);
    const double pc = c / (c + d);
    const double bc = 2 * c / (2 * c + d);
    CHECK(pairwise_to_probandwise(pc) == doctest::Approx(bc).epsilon(1e-14));
  }
}

TEST_CASE("cohort statistics on a hand-worked cohort") {
  const CohortStats s = cohort_statistics({1, 2, 1});
  CHECK(s.probandwise == 0.5);
  CHECK(s.pairwise == doctest::Approx(1.0 / 3));
  CHECK(s.v_concordance == 0.5);
  CHECK(s.psi_bar == 0.5);
}

TEST_CASE("cohort statistics flag the boundary cohort") {
  const CohortStats s = cohort_statistics({10, 0, 0});
  CHECK(s.probandwise == 1.0);
  CHECK(s.pairwise == 1.0);
  CHECK(s.v_concordance == 1.0);
  CHECK(s.psi_bar == 1.0);
  CHECK_THROWS_AS(cohort_statistics({0, 0, 10}), NoTraitPresent);
}

TEST_CASE("V identity holds exactly on random cohorts") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 1000; ++i) {
    TwinCohort t{rng() % 500, rng() % 500, rng() % 500};
    if (t.both == 0 && t.discordant == 0) t.both = 1;
    const CohortStats s = cohort_statistics(t);
    CHECK(s.v_concordance ==
          doctest::Approx(1 - 2 * s.psi_bar * (1 - s.probandwise))
              .epsilon(1e-14));
    CHECK(s.v_concordance ==
          doctest::Approx(1 - 2 * s.psi_bar * (1 - s.pairwise) /
                                  (1 + s.pairwise))
              .epsilon(1e-14));
  }
}

TEST_CASE("single-trait R^2 bound") {
  // Concordance equal to prevalence carries no familial signal.
  CHECK(r_squared_upper_bound({ConcordanceKind::Probandwise, 0.5, 0.5}) ==
        doctest::Approx(0.0));
  // Perfect concordance leaves the bound vacuous.
  CHECK(r_squared_upper_bound({ConcordanceKind::Probandwise, 1.0, 0.3}) ==
        doctest::Approx(1.0));
  // Smoking-trait numbers; pairs into the full bound below.
  CHECK(r_squared_upper_bound({ConcordanceKind::Probandwise, 0.67, 0.65}) ==
        doctest::Approx(0.0571429).epsilon(1e-3));
}

TEST_CASE("inconsistent evidence is rejected, slack is clipped") {
  CHECK_THROWS_AS(
      r_squared_upper_bound({ConcordanceKind::Probandwise, 0.10, 0.65}),
      InconsistentEvidence);
  // Radicand within floating slack of zero clips to zero.
  const double bound = r_squared_upper_bound(
      {ConcordanceKind::Probandwise, 0.65 - 1e-12, 0.65});
  CHECK(bound == 0.0);
}

TEST_CASE("randomness lower bound on the worked examples") {
  // These are the values the printed per-trait bounds actually produce;
  // see the acceptance suite for the published 0.79/0.75 claims.
  const RandomnessBound copd =
      lower_bound_eta({ConcordanceKind::Probandwise, 0.67, 0.65},
                      {ConcordanceKind::Probandwise, 0.20, 0.14});
  CHECK(copd.r2_pi_upper == doctest::Approx(0.0571429).epsilon(1e-4));
  CHECK(copd.r2_r_upper == doctest::Approx(0.0697674).epsilon(1e-4));
  CHECK(copd.l_eta ==
        doctest::Approx(1 - std::sqrt(0.0571429 * 0.0697674)).epsilon(1e-4));

  const RandomnessBound drugs =
      lower_bound_eta({ConcordanceKind::Probandwise, 0.50, 0.43},
                      {ConcordanceKind::Probandwise, 0.40, 0.17});
  CHECK(drugs.l_eta ==
        doctest::Approx(1 - std::sqrt(0.122807 * 0.277108)).epsilon(1e-4));
}

TEST_CASE("perfect concordance on both traits gives no evidence") {
  const RandomnessBound b =
      lower_bound_eta({ConcordanceKind::Probandwise, 1.0, 0.4},
                      {ConcordanceKind::Probandwise, 1.0, 0.2});
  CHECK(b.l_eta == doctest::Approx(0.0));
}

TEST_CASE("mixed evidence kinds factor per trait") {
  // A pairwise value converts to the probandwise bound exactly, so mixing
  // kinds must equal converting first.
  const double pc = 0.35;
  const double bc = pairwise_to_probandwise(pc);
  const RandomnessBound mixed =
      lower_bound_eta({ConcordanceKind::Pairwise, pc, 0.3},
                      {ConcordanceKind::Probandwise, 0.5, 0.2});
  const RandomnessBound converted =
      lower_bound_eta({ConcordanceKind::Probandwise, bc, 0.3},
                      {ConcordanceKind::Probandwise, 0.5, 0.2});
  CHECK(mixed.l_eta == doctest::Approx(converted.l_eta).epsilon(1e-14));
}

TEST_CASE("bound weakens as concordance rises") {
  double prev = 2.0;
  for (int i = 0; i <= 20; ++i) {
    const double bc = 0.3 + 0.035 * i;
    const RandomnessBound b =
        lower_bound_eta({ConcordanceKind::Probandwise, bc, 0.3},
                        {ConcordanceKind::Probandwise, 0.5, 0.2});
    CHECK(b.l_eta <= prev + 1e-12);
    prev = b.l_eta;
  }
}

}  // TEST_SUITE
