// Command line front end for observational causality testing: thresholds
// from tables or summaries, twin-concordance randomness bounds, finite
// population corrections, covariate adjustment, and the self-check suite.
//
// Reports are a single JSON document on stdout with stable field order; a
// short human summary goes to stderr. Exit codes: 0 success, 1 data or
// computation error, 2 usage error, 3 verification failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "octest/concordance.hpp"
#include "octest/covariate.hpp"
#include "octest/errors.hpp"
#include "octest/finitepop.hpp"
#include "octest/ingest.hpp"
#include "octest/oracle.hpp"
#include "octest/report.hpp"
#include "octest/tables.hpp"
#include "octest/threshold.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace octest;

constexpr const char* kSchema = "octest.report/1";

Counts2x2 parse_table(const std::string& text) {
  std::vector<std::uint64_t> cells;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      cells.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw ParseError("table cells must be non-negative integers: " + item);
    }
  }
  if (cells.size() != 4) {
    throw ParseError("expected four cells x01,x11,x00,x10");
  }
  return Counts2x2{cells[0], cells[1], cells[2], cells[3]};
}

StratifiedTable parse_strata(const std::string& text) {
  StratifiedTable table;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (part.empty()) continue;
    const auto colon = part.find(':');
    if (colon == std::string::npos) {
      throw ParseError("stratum must look like label:x01,x11,x00,x10");
    }
    table.strata.push_back(
        {part.substr(0, colon), parse_table(part.substr(colon + 1))});
  }
  if (table.strata.empty()) throw ParseError("no strata given");
  return table;
}

double parse_rate(const std::string& text) {
  std::string t = text;
  bool percent = false;
  if (!t.empty() && t.back() == '%') {
    percent = true;
    t.pop_back();
  }
  double v = 0;
  try {
    v = std::stod(t);
  } catch (const std::exception&) {
    throw ParseError("expected a number or percentage: " + text);
  }
  return percent ? v / 100.0 : v;
}

MarginalSummary parse_measure(double pe, double pd, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    throw ParseError("measure must look like rr=5.8, or=2.0, rd=0.1, phi=0.2");
  }
  MarginalSummary m;
  m.p_e = pe;
  m.p_d = pd;
  m.kind = association_kind_from_string(text.substr(0, eq));
  m.value = std::stod(text.substr(eq + 1));
  return m;
}

MicrodataSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open spec file: " + path);
  return parse_spec(in);
}

std::ifstream open_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open csv file: " + path);
  return in;
}

json json_counts(const Counts2x2& c) {
  return json{{"x01", c.x01}, {"x11", c.x11}, {"x00", c.x00}, {"x10", c.x10}};
}

json json_probs(const Probs2x2& p) {
  return json{{"p01", p.p01}, {"p11", p.p11}, {"p00", p.p00}, {"p10", p.p10},
              {"p_e", p.p_e()}, {"p_d", p.p_d()}};
}

void emit(const json& report, const std::string& summary) {
  std::cout << report.dump(2) << "\n";
  std::cerr << summary << "\n";
}

// Shared table-or-summary input group.
struct TableInput {
  std::string table_text;
  std::string csv_path;
  std::string spec_path;
  double pe = -1;
  double pd = -1;
  std::string measure_text;
  bool haldane = false;

  void add_to(CLI::App* cmd, bool with_measure) {
    cmd->add_option("--table", table_text,
                    "cell counts x01,x11,x00,x10 (e.g. 318,1631,4679,7538)");
    cmd->add_option("--csv", csv_path, "microdata CSV file (header required)");
    cmd->add_option("--spec", spec_path, "column spec file for --csv");
    cmd->add_flag("--haldane", haldane,
                  "add 0.5 to every cell before converting to probabilities");
    if (with_measure) {
      cmd->add_option("--pe", pe, "exposure prevalence in (0,1)");
      cmd->add_option("--pd", pd, "outcome prevalence in (0,1)");
      cmd->add_option("--measure", measure_text,
                      "association measure, e.g. rr=5.8 | or=2 | rd=0.1 | "
                      "phi=0.16");
    }
  }

  bool has_table() const { return !table_text.empty(); }
  bool has_csv() const { return !csv_path.empty(); }
  bool has_summary() const { return !measure_text.empty(); }

  // Raw counts for commands that resample; summaries are not accepted.
  Counts2x2 resolve_counts(json* echo) const {
    if (has_summary()) {
      throw CLI::ValidationError("input",
                                 "this command needs cell counts, not a "
                                 "prevalence/measure summary");
    }
    if (has_table() == has_csv()) {
      throw CLI::ValidationError("input",
                                 "give exactly one of --table or --csv");
    }
    if (has_table()) {
      const Counts2x2 c = parse_table(table_text);
      (*echo)["table"] = json_counts(c);
      return c;
    }
    if (spec_path.empty()) {
      throw CLI::ValidationError("input", "--csv needs --spec");
    }
    auto csv = open_csv(csv_path);
    const auto res = load_counts(csv, load_spec_file(spec_path));
    (*echo)["csv"] = csv_path;
    (*echo)["excluded_rows"] = res.excluded;
    (*echo)["table"] = json_counts(res.counts);
    return res.counts;
  }

  // Returns probabilities plus an input echo; counts echoed when present.
  Probs2x2 resolve(json* echo, std::uint64_t* excluded) const {
    const int ways = (has_table() ? 1 : 0) + (has_csv() ? 1 : 0) +
                     (has_summary() ? 1 : 0);
    if (ways != 1) {
      throw CLI::ValidationError(
          "input", "give exactly one of --table, --csv, or --pe/--pd/--measure");
    }
    if (has_table()) {
      const Counts2x2 c = parse_table(table_text);
      (*echo)["table"] = json_counts(c);
      return haldane ? from_counts_haldane(c) : from_counts(c);
    }
    if (has_csv()) {
      if (spec_path.empty()) {
        throw CLI::ValidationError("input", "--csv needs --spec");
      }
      auto csv = open_csv(csv_path);
      const auto res = load_counts(csv, load_spec_file(spec_path));
      if (excluded) *excluded = res.excluded;
      (*echo)["csv"] = csv_path;
      (*echo)["excluded_rows"] = res.excluded;
      (*echo)["table"] = json_counts(res.counts);
      return haldane ? from_counts_haldane(res.counts)
                     : from_counts(res.counts);
    }
    if (pe <= 0 || pd <= 0) {
      throw CLI::ValidationError("input", "--measure needs --pe and --pd");
    }
    const MarginalSummary m = parse_measure(pe, pd, measure_text);
    (*echo)["summary"] = json{{"p_e", m.p_e},
                              {"p_d", m.p_d},
                              {"measure", to_string(m.kind)},
                              {"value", m.value}};
    return implied_probs(m);
  }
};

// Concordance evidence options shared by test/adjust.
struct EvidenceInput {
  std::string bc_e, bc_d, pc_e, pc_d;
  std::string prev_e, prev_d;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--bc-e", bc_e,
                    "probandwise twin concordance of the exposure trait");
    cmd->add_option("--bc-d", bc_d,
                    "probandwise twin concordance of the outcome trait");
    cmd->add_option("--pc-e", pc_e, "pairwise concordance of the exposure");
    cmd->add_option("--pc-d", pc_d, "pairwise concordance of the outcome");
    cmd->add_option("--prev-e", prev_e,
                    "override the exposure prevalence used in the bound");
    cmd->add_option("--prev-d", prev_d,
                    "override the outcome prevalence used in the bound");
  }

  bool any() const {
    return !bc_e.empty() || !bc_d.empty() || !pc_e.empty() || !pc_d.empty();
  }

  ConcordanceEvidence resolve_one(const std::string& bc, const std::string& pc,
                                  const std::string& prev_text,
                                  double table_prev, const char* trait,
                                  json* warnings) const {
    if (bc.empty() == pc.empty()) {
      throw CLI::ValidationError(
          "evidence", std::string("give exactly one of --bc-") + trait +
                          " or --pc-" + trait);
    }
    ConcordanceEvidence ev;
    ev.kind = bc.empty() ? ConcordanceKind::Pairwise
                         : ConcordanceKind::Probandwise;
    ev.value = parse_rate(bc.empty() ? pc : bc);
    ev.prevalence = table_prev;
    if (!prev_text.empty()) {
      ev.prevalence = parse_rate(prev_text);
      if (std::abs(ev.prevalence - table_prev) > 0.05) {
        warnings->push_back(
            std::string("prevalence override for the ") + trait +
            " trait differs from the table value by more than 0.05");
      }
    }
    return ev;
  }
};

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) | rd();
}

json threshold_json(const ThresholdResult& t) {
  json j{{"T", t.T}, {"phi_used", t.phi_used}};
  j["source"] =
      t.source == ThresholdSource::FromTable ? "table" : "measure";
  if (t.measure) j["measure"] = to_string(*t.measure);
  return j;
}

int cmd_threshold(const TableInput& input) {
  json report;
  report["schema"] = kSchema;
  report["command"] = "threshold";
  report["inputs"] = json::object();
  const Probs2x2 p = input.resolve(&report["inputs"], nullptr);

  const ThresholdResult t = threshold_T(p);
  report["probs"] = json_probs(p);
  report["phi"] = phi(p);
  const Measures m = measures(p);
  report["measures"] =
      json{{"rd", m.rd}, {"rr", m.rr}, {"or", m.odds_ratio}};
  report["threshold"] = threshold_json(t);
  report["verdict"] = to_string(decide_verdict(std::nullopt, t.T));

  std::ostringstream sum;
  sum << "T = " << t.T << " (phi = " << t.phi_used << ")";
  emit(report, sum.str());
  return 0;
}

int cmd_test(const TableInput& input, const EvidenceInput& evidence) {
  json report;
  report["schema"] = kSchema;
  report["command"] = "test";
  report["inputs"] = json::object();
  json warnings = json::array();

  const Probs2x2 p = input.resolve(&report["inputs"], nullptr);
  const ThresholdResult t = threshold_T(p);

  const ConcordanceEvidence ev_e = evidence.resolve_one(
      evidence.bc_e, evidence.pc_e, evidence.prev_e, p.p_e(), "e", &warnings);
  const ConcordanceEvidence ev_d = evidence.resolve_one(
      evidence.bc_d, evidence.pc_d, evidence.prev_d, p.p_d(), "d", &warnings);
  const RandomnessBound bound = lower_bound_eta(ev_e, ev_d);

  report["probs"] = json_probs(p);
  report["threshold"] = threshold_json(t);
  report["evidence"] = json{
      {"exposure",
       json{{"kind", ev_e.kind == ConcordanceKind::Probandwise ? "probandwise"
                                                               : "pairwise"},
            {"value", ev_e.value},
            {"prevalence", ev_e.prevalence}}},
      {"outcome",
       json{{"kind", ev_d.kind == ConcordanceKind::Probandwise ? "probandwise"
                                                               : "pairwise"},
            {"value", ev_d.value},
            {"prevalence", ev_d.prevalence}}}};
  report["randomness"] = json{{"l_eta", bound.l_eta},
                              {"r2_pi_upper", bound.r2_pi_upper},
                              {"r2_r_upper", bound.r2_r_upper}};
  report["ample_ratio"] = ample_randomness_ratio(bound.l_eta, t);
  const Verdict verdict = decide_verdict(bound.l_eta, t.T);
  report["verdict"] = to_string(verdict);
  report["assumptions"] = json::array(
      {"stable potential-outcome parameters (relaxed SUTVA)",
       "twin concordances transport to this population (matching "
       "prevalences)",
       "twin propensity sharing at least matches chance concordance (L <= "
       "V)"});
  report["warnings"] = warnings;

  std::ostringstream sum;
  sum << "l_eta = " << bound.l_eta << (verdict == Verdict::Warranted ? " > " : " <= ")
      << t.T << " = T -> " << to_string(verdict);
  emit(report, sum.str());
  return 0;
}

int cmd_fpc(const TableInput& input, double alpha, std::uint64_t samples,
            std::optional<std::uint64_t> seed) {
  json report;
  report["schema"] = kSchema;
  report["command"] = "fpc";
  report["inputs"] = json::object();
  json warnings = json::array();

  const Counts2x2 counts = input.resolve_counts(&report["inputs"]);

  ResampleConfig config;
  config.alpha = alpha;
  config.num_samples = samples;
  config.seed = seed.value_or(entropy_seed());
  if (samples < 1000) {
    warnings.push_back("fewer than 1000 samples; results are noisy");
  }

  const FpcResult res = fpc_threshold(counts, config);
  report["config"] = json{{"alpha", config.alpha},
                          {"samples", config.num_samples},
                          {"seed", config.seed},
                          {"seed_source", seed ? "given" : "entropy"}};
  report["results"] = json{{"T_point", res.t_point},
                           {"T_n", res.t_n},
                           {"quantile_alt", res.quantile_alt},
                           {"se_alt", res.se_alt},
                           {"accepted", res.accepted_count},
                           {"degenerate", res.degenerate_count}};
  report["verdict"] =
      to_string(decide_verdict(std::nullopt, res.t_n));
  report["warnings"] = warnings;

  std::ostringstream sum;
  sum << "T(x0) = " << res.t_point << ", corrected T_n(" << 1 - alpha
      << ") = " << res.t_n;
  emit(report, sum.str());
  return 0;
}

int cmd_adjust(const std::string& csv_path, const std::string& spec_path,
               const std::string& strata_text, double tol,
               const EvidenceInput& evidence) {
  json report;
  report["schema"] = kSchema;
  report["command"] = "adjust";
  report["inputs"] = json::object();
  json warnings = json::array();

  StratifiedTable table;
  if (!strata_text.empty()) {
    table = parse_strata(strata_text);
    report["inputs"]["strata_text"] = strata_text;
  } else if (!csv_path.empty() && !spec_path.empty()) {
    auto csv = open_csv(csv_path);
    const auto res = load_stratified(csv, load_spec_file(spec_path));
    table = res.table;
    report["inputs"]["csv"] = csv_path;
    report["inputs"]["excluded_rows"] = res.excluded;
  } else {
    throw CLI::ValidationError("input",
                               "give --strata or both --csv and --spec");
  }

  const Counts2x2 pooled = table.pooled();
  const Probs2x2 marginal_probs = from_counts(pooled);
  const ThresholdResult marginal = threshold_T(marginal_probs);
  const TauProblem problem = build_problem(table);
  const TauSolution solution = solve_tau(problem, tol);
  const double mh = adjusted_rr(table);

  report["inputs"]["pooled_table"] = json_counts(pooled);
  report["marginal"] = json{{"probs", json_probs(marginal_probs)},
                            {"threshold", threshold_json(marginal)}};
  report["adjusted"] = json{{"tau", solution.tau},
                            {"T_c", solution.t_c},
                            {"solver_gap", solution.solver_gap},
                            {"tol", tol},
                            {"adjusted_rr", mh}};
  json strata = json::array();
  for (std::size_t i = 0; i < problem.strata.size(); ++i) {
    const auto& b = problem.strata[i];
    strata.push_back(json{{"label", b.label},
                          {"weight", b.weight},
                          {"table", json_counts(table.strata[i].counts)},
                          {"phi2", b.phi2},
                          {"var_pi", solution.per_stratum[i].var_pi},
                          {"var_r", solution.per_stratum[i].var_r}});
  }
  report["strata"] = strata;

  std::optional<double> l_eta;
  if (evidence.any()) {
    const ConcordanceEvidence ev_e = evidence.resolve_one(
        evidence.bc_e, evidence.pc_e, evidence.prev_e, marginal_probs.p_e(),
        "e", &warnings);
    const ConcordanceEvidence ev_d = evidence.resolve_one(
        evidence.bc_d, evidence.pc_d, evidence.prev_d, marginal_probs.p_d(),
        "d", &warnings);
    const RandomnessBound bound = lower_bound_eta(ev_e, ev_d);
    l_eta = bound.l_eta;
    report["randomness"] = json{{"l_eta", bound.l_eta},
                                {"r2_pi_upper", bound.r2_pi_upper},
                                {"r2_r_upper", bound.r2_r_upper}};
    report["ample_ratio"] =
        json{{"marginal", ample_randomness_ratio(bound.l_eta, marginal)},
             {"adjusted", bound.l_eta / solution.t_c}};
  }
  const Verdict verdict = decide_verdict(l_eta, solution.t_c);
  report["verdict"] = to_string(verdict);
  report["warnings"] = warnings;

  std::ostringstream sum;
  sum << "marginal T = " << marginal.T << ", adjusted T_c = " << solution.t_c
      << ", adjusted RR = " << mh;
  emit(report, sum.str());
  return 0;
}

int cmd_verify(std::optional<std::uint64_t> seed, const std::string& intensity,
               bool inject_fault) {
  OracleOptions options;
  options.seed = seed.value_or(20240501);
  options.quick = intensity == "quick";
  options.inject_fault = inject_fault;
  const OracleReport result = run_oracle_suite(options);

  json report;
  report["schema"] = kSchema;
  report["command"] = "verify";
  report["config"] = json{{"seed", options.seed},
                          {"intensity", options.quick ? "quick" : "full"}};
  json checks = json::array();
  int passed = 0;
  for (const auto& c : result.checks) {
    checks.push_back(
        json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    if (c.passed) ++passed;
    std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail
              << ")\n";
  }
  report["checks"] = checks;
  report["passed"] = passed;
  report["total"] = static_cast<int>(result.checks.size());
  std::cout << report.dump(2) << "\n";
  std::cerr << passed << "/" << result.checks.size() << " checks passed\n";
  return result.all_passed() ? 0 : 3;
}

int cmd_ingest_check(const std::string& csv_path,
                     const std::string& spec_path) {
  json report;
  report["schema"] = kSchema;
  report["command"] = "ingest-check";
  const MicrodataSpec spec = load_spec_file(spec_path);

  report["spec"] = json{{"exposure", spec.exposure_column},
                        {"outcome", spec.outcome_column},
                        {"covariates", spec.covariate_columns}};
  if (spec.covariate_columns.empty()) {
    auto csv = open_csv(csv_path);
    const auto res = load_counts(csv, spec);
    report["rows"] = res.rows;
    report["excluded"] = res.excluded;
    report["table"] = json_counts(res.counts);
  } else {
    auto csv = open_csv(csv_path);
    const auto res = load_stratified(csv, spec);
    report["rows"] = res.rows;
    report["excluded"] = res.excluded;
    json strata = json::array();
    for (const auto& s : res.table.strata) {
      strata.push_back(
          json{{"label", s.label}, {"table", json_counts(s.counts)}});
    }
    report["strata"] = strata;
  }
  emit(report, "ingest ok");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"observational causality testing"};
  app.require_subcommand(1);

  TableInput threshold_input;
  auto* threshold_cmd =
      app.add_subcommand("threshold", "sufficient-randomness threshold T");
  threshold_input.add_to(threshold_cmd, true);

  TableInput test_input;
  EvidenceInput test_evidence;
  auto* test_cmd = app.add_subcommand(
      "test", "full causality test: threshold vs twin-concordance bound");
  test_input.add_to(test_cmd, true);
  test_evidence.add_to(test_cmd);

  TableInput fpc_input;
  double fpc_alpha = 0.05;
  std::uint64_t fpc_samples = 100000;
  std::optional<std::uint64_t> fpc_seed;
  auto* fpc_cmd =
      app.add_subcommand("fpc", "finite population corrected threshold");
  fpc_input.add_to(fpc_cmd, false);
  fpc_cmd->add_option("--alpha", fpc_alpha, "confidence level parameter")
      ->default_val(0.05);
  fpc_cmd->add_option("--samples", fpc_samples, "synthetic sample count")
      ->default_val(100000);
  fpc_cmd->add_option("--seed", fpc_seed, "RNG seed (entropy if omitted)");

  std::string adjust_csv, adjust_spec, adjust_strata;
  double adjust_tol = 1e-4;
  EvidenceInput adjust_evidence;
  auto* adjust_cmd =
      app.add_subcommand("adjust", "covariate-adjusted threshold T_c");
  adjust_cmd->add_option("--csv", adjust_csv, "microdata CSV file");
  adjust_cmd->add_option("--spec", adjust_spec, "column spec file");
  adjust_cmd->add_option(
      "--strata", adjust_strata,
      "explicit strata label:x01,x11,x00,x10;label2:... (alternative to csv)");
  adjust_cmd->add_option("--tol", adjust_tol, "certified gap on tau")
      ->default_val(1e-4);
  adjust_evidence.add_to(adjust_cmd);

  std::optional<std::uint64_t> verify_seed;
  std::string verify_intensity = "full";
  bool verify_fault = false;
  auto* verify_cmd =
      app.add_subcommand("verify", "run the built-in verification suite");
  verify_cmd->add_option("--seed", verify_seed, "RNG seed");
  verify_cmd->add_option("--intensity", verify_intensity, "quick or full")
      ->check(CLI::IsMember({"quick", "full"}));
  verify_cmd->add_flag("--inject-fault", verify_fault,
                       "force one check to fail (for testing the failure path)")
      ->group("");  // hidden

  std::string ingest_csv, ingest_spec;
  auto* ingest_cmd = app.add_subcommand(
      "ingest-check", "parse inputs and report counts without analysis");
  ingest_cmd->add_option("--csv", ingest_csv, "microdata CSV file")
      ->required();
  ingest_cmd->add_option("--spec", ingest_spec, "column spec file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (threshold_cmd->parsed()) return cmd_threshold(threshold_input);
    if (test_cmd->parsed()) return cmd_test(test_input, test_evidence);
    if (fpc_cmd->parsed())
      return cmd_fpc(fpc_input, fpc_alpha, fpc_samples, fpc_seed);
    if (adjust_cmd->parsed())
      return cmd_adjust(adjust_csv, adjust_spec, adjust_strata, adjust_tol,
                        adjust_evidence);
    if (verify_cmd->parsed())
      return cmd_verify(verify_seed, verify_intensity, verify_fault);
    if (ingest_cmd->parsed()) return cmd_ingest_check(ingest_csv, ingest_spec);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
