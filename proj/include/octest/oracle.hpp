#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "octest/concordance.hpp"
#include "octest/mat4.hpp"
#include "octest/tables.hpp"

namespace octest {

/// One member of a latent population: propensity of exposure plus the two
/// prognosis probabilities. Under the no-causality null r0 == r1.
struct Individual {
  double pi = 0;
  double r0 = 0;
  double r1 = 0;

  double expected_prognosis() const { return pi * r1 + (1 - pi) * r0; }
};

/// Finite equal-weight point-mass distribution over (pi, r0, r1); the
/// oracle-side stand-in for an arbitrary latent distribution.
struct LatentPopulation {
  std::vector<Individual> individuals;

  bool is_null() const;  // r0 == r1 for every individual
};

struct EtaValue {
  double eta = 1;
  double r_pi = 0;
  double r_r = 0;
};

/// eta = 1 - R_pi R_r with population (not sample) variances.
EtaValue eta_of(const LatentPopulation& pop);

/// The four cell probabilities any population reproduces in expectation.
Probs2x2 expected_cells(const LatentPopulation& pop);

struct BoundCheck {
  double eta = 0;
  double threshold = 0;
  bool ok = false;
};

/// For a null population, eta can never exceed the threshold of its own
/// expected table; a violation falsifies the threshold formula or the
/// implementation.
BoundCheck verify_threshold_bound(const LatentPopulation& pop);

/// Reared-apart twin simulation: both twins of a pair draw the trait
/// independently with the pair's psi. psi values cycle over the given list,
/// pairs_per_psi pairs each. Deterministic given the seed.
TwinCohort simulate_twin_cohort(std::span<const double> psi,
                                std::uint64_t pairs_per_psi,
                                std::uint64_t seed);

/// Covariance matrices of the frequency counts under a fixed null
/// population: exact generalized-binomial vs. the multinomial built from
/// the mean cell probabilities.
struct CovariancePair {
  Mat4 gpb{};
  Mat4 mult{};
};

CovariancePair covariance_pair(const LatentPopulation& pop);

/// Full verification suite (used by the CLI `verify` subcommand and CI).
struct OracleOptions {
  std::uint64_t seed = 20240501;
  bool quick = false;        // reduced replication counts, < 10 s
  bool inject_fault = false; // test-only: force one check to fail
  bool parallel = true;
};

struct OracleCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct OracleReport {
  std::vector<OracleCheck> checks;

  bool all_passed() const;
};

OracleReport run_oracle_suite(const OracleOptions& options);

}  // namespace octest
