#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "octest/tables.hpp"

namespace octest {

enum class MissingPolicy { Drop, Strict };

/// Derived binary column: `name = column OP constant` with a numeric
/// comparison, e.g. age_over_35 = age >= 35.
struct DerivedColumn {
  std::string name;
  std::string source;
  std::string op;  // one of < <= > >= ==
  double constant = 0;
};

/// How microdata columns map onto (e, d, c). Values matching true_values
/// map to 1, false_values to 0; anything else is unmappable and handled
/// per policy.
struct MicrodataSpec {
  std::string exposure_column;
  std::string outcome_column;
  std::vector<std::string> covariate_columns;
  std::vector<std::string> true_values = {"1", "yes", "true"};
  std::vector<std::string> false_values = {"0", "no", "false"};
  MissingPolicy policy = MissingPolicy::Drop;
  std::vector<DerivedColumn> derived;
};

/// Parses the flat key = value spec document. Recognized keys: exposure,
/// outcome, covariates (comma list), true_values, false_values,
/// missing_policy (drop|strict), and `derive <name> = <col> <op> <const>`
/// lines.
MicrodataSpec parse_spec(std::istream& in);

struct CountsResult {
  Counts2x2 counts;
  std::uint64_t rows = 0;
  std::uint64_t excluded = 0;
};

struct StratifiedResult {
  StratifiedTable table;
  std::uint64_t rows = 0;
  std::uint64_t excluded = 0;
};

/// Tabulates comma-delimited microdata (header row required) into cell
/// counts. Unmappable or missing rows are dropped and counted under the
/// drop policy, or raise UnmappableValue under strict.
CountsResult load_counts(std::istream& csv, const MicrodataSpec& spec);

/// One stratum per distinct combination of covariate values; strata are
/// ordered by label for reproducible output.
StratifiedResult load_stratified(std::istream& csv, const MicrodataSpec& spec);

/// Inverse-probability-weighting correction for under-ascertained survivors
/// among the hospitalized: survivors scale by 1/(1-effectiveness) of the
/// total, deaths stay fixed. effectiveness = 0 is the identity.
std::uint64_t ipw_hospitalized_adjust(std::uint64_t deaths,
                                      std::uint64_t survivors,
                                      double effectiveness);

}  // namespace octest
