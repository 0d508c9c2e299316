#include <doctest.h>

#include <cmath>
#include <random>

#include "octest/errors.hpp"
#include "octest/tables.hpp"

using namespace octest;

namespace {

// Worked tables used across the suites, in (x01, x11, x00, x10) order.
const Counts2x2 kCopd{318, 1631, 4679, 7538};
const Counts2x2 kDrugs{114, 978, 3649, 1864};
const Counts2x2 kVaccine{1006, 188, 6089, 11102};
const Counts2x2 kUniform{25, 25, 25, 25};

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Probs2x2 random_table(std::mt19937_64& rng) {
  double c[4];
  double sum = 0;
  for (double& v : c) {
    v = -std::log(1 - uniform01(rng)) + 1e-3;
    sum += v;
  }
  return make_probs(c[0] / sum, c[1] / sum, c[2] / sum, c[3] / sum);
}

}  // namespace

TEST_SUITE("tables") {

TEST_CASE("from_counts reproduces the smoking table frequencies") {
  const Probs2x2 p = from_counts(kCopd);
  CHECK(p.p01 == doctest::Approx(0.02246).epsilon(1e-3));
  CHECK(p.p11 == doctest::Approx(0.11520).epsilon(1e-3));
  CHECK(p.p00 == doctest::Approx(0.33049).epsilon(1e-3));
  CHECK(p.p10 == doctest::Approx(0.53245).epsilon(1e-3));
  CHECK(p.p_e() == doctest::Approx(0.65).epsilon(0.01));
  CHECK(p.p_d() == doctest::Approx(0.14).epsilon(0.02));
}

TEST_CASE("from_counts on the uniform table") {
  const Probs2x2 p = from_counts(kUniform);
  CHECK(p.p01 == 0.25);
  CHECK(p.p11 == 0.25);
  CHECK(p.p00 == 0.25);
  CHECK(p.p10 == 0.25);
}

TEST_CASE("from_counts marginals of the drug-use table") {
  const Probs2x2 p = from_counts(kDrugs);
  CHECK(p.p_e() == doctest::Approx(0.43).epsilon(0.01));
  CHECK(p.p_d() == doctest::Approx(0.17).epsilon(0.02));
}

TEST_CASE("from_counts rejects zero cells and empty tables") {
  CHECK_THROWS_AS(from_counts(Counts2x2{0, 1, 1, 1}), ZeroCell);
  CHECK_THROWS_AS(from_counts(Counts2x2{0, 0, 0, 0}), EmptyTable);
}

TEST_CASE("haldane correction fills zero cells") {
  const Probs2x2 p = from_counts_haldane(Counts2x2{0, 10, 10, 10});
  CHECK(p.p01 > 0);
  CHECK(p.p01 + p.p11 + p.p00 + p.p10 == doctest::Approx(1.0));
}

TEST_CASE("phi on the worked tables") {
  CHECK(phi(from_counts(kCopd)) == doctest::Approx(0.16).epsilon(0.032));
  CHECK(std::abs(phi(from_counts(kCopd)) - 0.16) < 0.005);
  CHECK(phi(from_counts(kUniform)) == 0.0);
  CHECK(std::abs(phi(from_counts(kVaccine)) - (-0.25)) < 0.005);
}

TEST_CASE("phi flips sign when the exposure labels swap") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 200; ++i) {
    const Probs2x2 p = random_table(rng);
    const Probs2x2 swapped{p.p11, p.p01, p.p10, p.p00};
    CHECK(phi(swapped) == doctest::Approx(-phi(p)).epsilon(1e-13));
  }
}

TEST_CASE("association measures on the worked tables") {
  const Measures copd = measures(from_counts(kCopd));
  CHECK(std::abs(copd.rr - 2.8) < 0.05);
  const Measures drugs = measures(from_counts(kDrugs));
  CHECK(std::abs(drugs.rr - 11.4) < 0.1);
  const Measures sym = measures(from_counts(kUniform));
  CHECK(sym.rd == 0.0);
  CHECK(sym.rr == 1.0);
  CHECK(sym.odds_ratio == 1.0);
}

TEST_CASE("mantel-haenszel pooled relative risk") {
  // Vaccination x death x age; hand-computed pooled RR = 0.0808257.
  StratifiedTable t;
  t.strata = {{"18-49", {155, 7, 2666, 1523}},
              {"50-64", {290, 23, 1755, 2447}},
              {"65+", {561, 158, 1668, 7132}}};
  const double rr = adjusted_rr(t);
  CHECK(rr == doctest::Approx(0.0808257).epsilon(1e-4));
  CHECK(std::abs(rr - 0.08) < 0.005);
}

TEST_CASE("single-stratum pooled RR equals the crude RR") {
  StratifiedTable t;
  t.strata = {{"all", kDrugs}};
  const double crude = measures(from_counts(kDrugs)).rr;
  CHECK(adjusted_rr(t) == doctest::Approx(crude).epsilon(1e-12));
}

TEST_CASE("replicated strata leave the pooled RR unchanged") {
  StratifiedTable t;
  for (int k = 0; k < 3; ++k) {
    t.strata.push_back({"copy" + std::to_string(k), kCopd});
  }
  const double crude = measures(from_counts(kCopd)).rr;
  CHECK(adjusted_rr(t) == doctest::Approx(crude).epsilon(1e-12));
}

TEST_CASE("pooled RR rejects strata without exposed subjects") {
  StratifiedTable t;
  t.strata = {{"bad", {5, 0, 7, 0}}};
  CHECK_THROWS_AS(adjusted_rr(t), DegenerateStratum);
}

TEST_CASE("implied_probs round-trips every measure") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 300; ++i) {
    const Probs2x2 p = random_table(rng);
    const Measures m = measures(p);
    const double ph = phi(p);
    const MarginalSummary summaries[4] = {
        {p.p_e(), p.p_d(), AssociationKind::Phi, ph},
        {p.p_e(), p.p_d(), AssociationKind::RiskDifference, m.rd},
        {p.p_e(), p.p_d(), AssociationKind::RelativeRisk, m.rr},
        {p.p_e(), p.p_d(), AssociationKind::OddsRatio, m.odds_ratio}};
    for (const auto& s : summaries) {
      const Probs2x2 back = implied_probs(s);
      CHECK(back.p01 == doctest::Approx(p.p01).epsilon(1e-9));
      CHECK(back.p11 == doctest::Approx(p.p11).epsilon(1e-9));
      CHECK(back.p00 == doctest::Approx(p.p00).epsilon(1e-9));
      CHECK(back.p10 == doctest::Approx(p.p10).epsilon(1e-9));
    }
  }
}

TEST_CASE("implied_probs rejects impossible triples") {
  // p11 would need to exceed p_e.
  CHECK_THROWS_AS(
      implied_probs({0.1, 0.5, AssociationKind::RelativeRisk, 60.0}),
      Infeasible);
  CHECK_THROWS_AS(implied_probs({0.5, 0.5, AssociationKind::Phi, 0.9999}),
                  Infeasible);
}

TEST_CASE("odds ratio of one converts to relative risk of one") {
  CHECK(rr_from_odds_ratio(0.3, 0.2, 1.0) == doctest::Approx(1.0));
  CHECK(rr_from_odds_ratio(0.7, 0.1, 1.0) == doctest::Approx(1.0));
}

}  // TEST_SUITE
