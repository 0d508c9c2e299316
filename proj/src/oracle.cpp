#include "octest/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "octest/chi2.hpp"
#include "octest/errors.hpp"
#include "octest/finitepop.hpp"
#include "octest/rng.hpp"
#include "octest/threshold.hpp"

namespace octest {

bool LatentPopulation::is_null() const {
  for (const auto& ind : individuals)
    if (ind.r0 != ind.r1) return false;
  return true;
}

EtaValue eta_of(const LatentPopulation& pop) {
  if (pop.individuals.empty()) throw EmptyTable("population is empty");
  const double n = static_cast<double>(pop.individuals.size());
  double mean_pi = 0;
  double mean_r = 0;
  for (const auto& ind : pop.individuals) {
    mean_pi += ind.pi;
    mean_r += ind.expected_prognosis();
  }
  mean_pi /= n;
  mean_r /= n;
  if (mean_pi <= 0 || mean_pi >= 1 || mean_r <= 0 || mean_r >= 1) {
    throw DegenerateMean("population means must be interior");
  }
  double var_pi = 0;
  double var_r = 0;
  for (const auto& ind : pop.individuals) {
    const double dpi = ind.pi - mean_pi;
    const double dr = ind.expected_prognosis() - mean_r;
    var_pi += dpi * dpi;
    var_r += dr * dr;
  }
  var_pi /= n;
  var_r /= n;

  EtaValue out;
  out.r_pi = std::sqrt(var_pi / (mean_pi * (1 - mean_pi)));
  out.r_r = std::sqrt(var_r / (mean_r * (1 - mean_r)));
  out.eta = 1 - out.r_pi * out.r_r;
  return out;
}

Probs2x2 expected_cells(const LatentPopulation& pop) {
  if (pop.individuals.empty()) throw EmptyTable("population is empty");
  const double n = static_cast<double>(pop.individuals.size());
  double p01 = 0, p11 = 0, p00 = 0, p10 = 0;
  for (const auto& ind : pop.individuals) {
    p01 += (1 - ind.pi) * ind.r0;
    p11 += ind.pi * ind.r1;
    p00 += (1 - ind.pi) * (1 - ind.r0);
    p10 += ind.pi * (1 - ind.r1);
  }
  return Probs2x2{p01 / n, p11 / n, p00 / n, p10 / n};
}

BoundCheck verify_threshold_bound(const LatentPopulation& pop) {
  BoundCheck out;
  out.eta = eta_of(pop).eta;
  out.threshold = threshold_T(expected_cells(pop)).T;
  out.ok = out.eta <= out.threshold + 1e-9;
  return out;
}

TwinCohort simulate_twin_cohort(std::span<const double> psi,
                                std::uint64_t pairs_per_psi,
                                std::uint64_t seed) {
  for (double v : psi) {
    if (!(v > 0 && v < 1)) throw DomainError("psi values must be interior");
  }
  TwinCohort cohort;
  const std::int64_t blocks = static_cast<std::int64_t>(psi.size());
  std::uint64_t both = 0, discordant = 0, neither = 0;
#pragma omp parallel for schedule(static) \
    reduction(+ : both, discordant, neither)
  for (std::int64_t j = 0; j < blocks; ++j) {
    Philox4x32 rng(seed, static_cast<std::uint64_t>(j));
    const double p = psi[static_cast<std::size_t>(j)];
    for (std::uint64_t i = 0; i < pairs_per_psi; ++i) {
      const bool t1 = rng.next_double() < p;
      const bool t2 = rng.next_double() < p;
      if (t1 && t2) {
        ++both;
      } else if (t1 || t2) {
        ++discordant;
      } else {
        ++neither;
      }
    }
  }
  cohort.both = both;
  cohort.discordant = discordant;
  cohort.neither = neither;
  return cohort;
}

CovariancePair covariance_pair(const LatentPopulation& pop) {
  if (pop.individuals.empty()) throw EmptyTable("population is empty");
  const double n = static_cast<double>(pop.individuals.size());
  CovariancePair out;
  Vec4 pbar{};
  for (const auto& ind : pop.individuals) {
    const Vec4 p = {(1 - ind.pi) * ind.r0, ind.pi * ind.r1,
                    (1 - ind.pi) * (1 - ind.r0), ind.pi * (1 - ind.r1)};
    for (int a = 0; a < 4; ++a) {
      pbar[a] += p[a];
      for (int b = 0; b < 4; ++b) {
        out.gpb[a][b] += (a == b ? p[a] * (1 - p[a]) : -p[a] * p[b]);
      }
    }
  }
  for (int a = 0; a < 4; ++a) pbar[a] /= n;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      out.mult[a][b] =
          a == b ? n * pbar[a] * (1 - pbar[a]) : -n * pbar[a] * pbar[b];
  return out;
}

bool OracleReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const OracleCheck& c) { return c.passed; });
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

double uniform_in(Philox4x32& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.next_double();
}

LatentPopulation random_null_population(std::uint64_t seed,
                                        std::uint64_t stream,
                                        std::size_t min_size,
                                        std::size_t max_size) {
  Philox4x32 rng(seed, stream);
  const std::size_t span = max_size - min_size + 1;
  const std::size_t size =
      min_size + static_cast<std::size_t>(rng.next_u64() % span);
  LatentPopulation pop;
  pop.individuals.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double pi = uniform_in(rng, 0.02, 0.98);
    const double r = uniform_in(rng, 0.02, 0.98);
    pop.individuals.push_back({pi, r, r});
  }
  return pop;
}

Probs2x2 random_interior_table(std::uint64_t seed, std::uint64_t stream) {
  Philox4x32 rng(seed, stream);
  // Dirichlet(1,1,1,1) via exponential spacings, floored away from zero.
  double cells[4];
  double sum = 0;
  for (double& c : cells) {
    c = -std::log(1 - rng.next_double()) + 1e-3;
    sum += c;
  }
  return make_probs(cells[0] / sum, cells[1] / sum, cells[2] / sum,
                    cells[3] / sum);
}

OracleCheck check_branch_consistency(const OracleOptions& opt) {
  const int trials = opt.quick ? 250 : 1200;
  int failures = 0;
  double worst = 0;
  for (int i = 0; i < trials; ++i) {
    const Probs2x2 p = random_interior_table(opt.seed, 0x100000 + i);
    const double t_table = threshold_T(p).T;
    const Measures m = measures(p);
    const double pe = p.p_e();
    const double pd = p.p_d();
    const MarginalSummary cases[3] = {
        {pe, pd, AssociationKind::RiskDifference, m.rd},
        {pe, pd, AssociationKind::RelativeRisk, m.rr},
        {pe, pd, AssociationKind::OddsRatio, m.odds_ratio}};
    for (const auto& summary : cases) {
      const double t = threshold_from_measure(summary).T;
      worst = std::max(worst, std::abs(t - t_table));
      if (std::abs(t - t_table) > 1e-9) ++failures;
    }
  }
  OracleCheck c;
  c.name = "measure-branch consistency";
  c.passed = failures == 0;
  if (opt.inject_fault) c.passed = false;
  c.detail = std::to_string(trials) + " tables, worst deviation " + fmt(worst);
  return c;
}

OracleCheck check_threshold_soundness(const OracleOptions& opt) {
  const std::int64_t trials = opt.quick ? 120 : 600;
  std::vector<std::uint8_t> ok(static_cast<std::size_t>(trials), 0);
  std::vector<double> slack(static_cast<std::size_t>(trials), 0.0);
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
  for (std::int64_t i = 0; i < trials; ++i) {
    const auto pop = random_null_population(opt.seed, 0x200000 + i, 2, 10000);
    const BoundCheck b = verify_threshold_bound(pop);
    ok[static_cast<std::size_t>(i)] = b.ok ? 1 : 0;
    slack[static_cast<std::size_t>(i)] = b.threshold - b.eta;
  }
  int failures = 0;
  double min_slack = 1e9;
  for (std::int64_t i = 0; i < trials; ++i) {
    if (!ok[static_cast<std::size_t>(i)]) ++failures;
    min_slack = std::min(min_slack, slack[static_cast<std::size_t>(i)]);
  }
  OracleCheck c;
  c.name = "threshold soundness on null populations";
  c.passed = failures == 0;
  c.detail = std::to_string(trials) + " populations, min(T - eta) " +
             fmt(min_slack);
  return c;
}

OracleCheck check_near_tightness(const OracleOptions& opt) {
  // Two-point family on the diagonal of the unit square approaches the
  // threshold from below; equality holds in exact arithmetic.
  double best_gap = 1e9;
  const int grid = opt.quick ? 30 : 80;
  for (int ia = 1; ia < grid; ++ia) {
    for (int ib = ia + 1; ib < grid; ++ib) {
      const double a = static_cast<double>(ia) / grid;
      const double b = static_cast<double>(ib) / grid;
      LatentPopulation pop;
      pop.individuals = {{a, a, a}, {b, b, b}};
      const BoundCheck chk = verify_threshold_bound(pop);
      best_gap = std::min(best_gap, chk.threshold - chk.eta);
    }
  }
  OracleCheck c;
  c.name = "near tightness of the threshold";
  c.passed = best_gap <= 0.05;
  c.detail = "smallest T - eta over two-point family " + fmt(best_gap);
  return c;
}

OracleCheck check_lemma_a1(const OracleOptions& opt) {
  const int trials = opt.quick ? 300 : 1200;
  Philox4x32 rng(opt.seed, 0x300000);
  int failures = 0;
  for (int i = 0; i < trials; ++i) {
    TwinCohort t;
    t.both = rng.next_u64() % 2000;
    t.discordant = rng.next_u64() % 2000;
    t.neither = rng.next_u64() % 2000;
    if (t.both == 0 && t.discordant == 0) t.both = 1;
    // Integer form of the identity: U + C = n - D.
    if (t.neither + t.both != t.pairs() - t.discordant) ++failures;
    const CohortStats s = cohort_statistics(t);
    const double lhs = s.v_concordance;
    const double rhs = 1 - 2 * s.psi_bar * (1 - s.probandwise);
    const double rhs_pc =
        1 - 2 * s.psi_bar * (1 - s.pairwise) / (1 + s.pairwise);
    if (std::abs(lhs - rhs) > 1e-14 || std::abs(lhs - rhs_pc) > 1e-14) {
      ++failures;
    }
    // Pairwise-to-probandwise conversion is the same identity.
    if (std::abs(pairwise_to_probandwise(s.pairwise) - s.probandwise) >
        1e-14) {
      ++failures;
    }
  }
  OracleCheck c;
  c.name = "concordance identity (V from BC and PC)";
  c.passed = failures == 0;
  c.detail = std::to_string(trials) + " cohorts, failures " +
             std::to_string(failures);
  return c;
}

OracleCheck check_lemma_a2(const OracleOptions& opt) {
  const int trials = opt.quick ? 300 : 1200;
  int failures = 0;
  double worst = 0;
  for (int i = 0; i < trials; ++i) {
    Philox4x32 rng(opt.seed, 0x400000 + static_cast<std::uint64_t>(i));
    const std::size_t count = 2 + rng.next_u64() % 200;
    std::vector<double> psi(count);
    for (double& v : psi) v = uniform_in(rng, 0.01, 0.99);
    double mean = 0, big_l = 0;
    for (double v : psi) {
      mean += v;
      big_l += v * v + (1 - v) * (1 - v);
    }
    mean /= static_cast<double>(count);
    big_l /= static_cast<double>(count);
    double var = 0;
    for (double v : psi) var += (v - mean) * (v - mean);
    var /= static_cast<double>(count);
    const double r2 = var / (mean * (1 - mean));
    const double r2_from_l = 1 - (1 - big_l) / (2 * mean * (1 - mean));
    worst = std::max(worst, std::abs(r2 - r2_from_l));
    if (std::abs(r2 - r2_from_l) > 1e-12) ++failures;
  }
  OracleCheck c;
  c.name = "determination identity (R^2 from L)";
  c.passed = failures == 0;
  c.detail = std::to_string(trials) + " psi lists, worst deviation " +
             fmt(worst);
  return c;
}

OracleCheck check_prop_a3(const OracleOptions& opt) {
  const std::int64_t sims = opt.quick ? 60 : 250;
  const std::uint64_t pairs_per_psi = 25000;
  std::vector<std::uint8_t> violated(static_cast<std::size_t>(sims), 0);
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
  for (std::int64_t s = 0; s < sims; ++s) {
    Philox4x32 rng(opt.seed, 0x500000 + static_cast<std::uint64_t>(s));
    const std::size_t levels = 2 + rng.next_u64() % 5;
    std::vector<double> psi(levels);
    for (double& v : psi) v = uniform_in(rng, 0.05, 0.95);
    const TwinCohort cohort = simulate_twin_cohort(
        psi, pairs_per_psi,
        opt.seed ^ (0xABCD0000u + static_cast<std::uint64_t>(s)));
    const CohortStats stats = cohort_statistics(cohort);
    double mean = 0;
    for (double v : psi) mean += v;
    mean /= static_cast<double>(levels);
    double var = 0;
    for (double v : psi) var += (v - mean) * (v - mean);
    var /= static_cast<double>(levels);
    const double true_r2 = var / (mean * (1 - mean));
    const double bound =
        1 - (1 - stats.probandwise) / (1 - stats.psi_bar);
    if (bound < true_r2 - 0.01) violated[static_cast<std::size_t>(s)] = 1;
  }
  int total = 0;
  for (auto v : violated) total += v;
  OracleCheck c;
  c.name = "concordance R^2 bound on simulated cohorts";
  c.passed = total <= static_cast<int>(0.01 * static_cast<double>(sims)) + (sims < 100 ? 1 : 0);
  c.detail = std::to_string(total) + " violations in " +
             std::to_string(sims) + " simulations";
  return c;
}

OracleCheck check_loewner(const OracleOptions& opt) {
  const std::int64_t trials = opt.quick ? 80 : 250;
  std::vector<double> mins(static_cast<std::size_t>(trials), 0.0);
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
  for (std::int64_t i = 0; i < trials; ++i) {
    const auto pop = random_null_population(opt.seed, 0x600000 + i, 2, 10000);
    const CovariancePair cp = covariance_pair(pop);
    Mat4 diff;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) diff[a][b] = cp.mult[a][b] - cp.gpb[a][b];
    mins[static_cast<std::size_t>(i)] = jacobi_eigen(diff).values[0];
  }
  double worst = 1e18;
  for (double v : mins) worst = std::min(worst, v);
  OracleCheck c;
  c.name = "multinomial covariance dominates (Loewner)";
  c.passed = worst >= -1e-9;
  c.detail = std::to_string(trials) + " populations, min eigenvalue " +
             fmt(worst);
  return c;
}

OracleCheck check_diagonal_dominance(const OracleOptions& opt) {
  // The dominance mechanism needs the off-diagonal covariances of the cell
  // probabilities to be non-positive, which holds for large populations
  // with independently drawn (pi, r) but not for tiny ones.
  const std::int64_t trials = opt.quick ? 80 : 250;
  std::vector<double> margins(static_cast<std::size_t>(trials), 0.0);
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
  for (std::int64_t i = 0; i < trials; ++i) {
    const auto pop =
        random_null_population(opt.seed, 0x700000 + i, 2000, 20000);
    const CovariancePair cp = covariance_pair(pop);
    Mat4 diff;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) diff[a][b] = cp.mult[a][b] - cp.gpb[a][b];
    double worst_row = 1e18;
    for (int a = 0; a < 4; ++a) {
      double off = 0;
      for (int b = 0; b < 4; ++b)
        if (a != b) off += std::abs(diff[a][b]);
      worst_row = std::min(worst_row, diff[a][a] - off);
    }
    margins[static_cast<std::size_t>(i)] = worst_row;
  }
  double worst = 1e18;
  for (double v : margins) worst = std::min(worst, v);
  OracleCheck c;
  c.name = "difference matrix diagonal dominance";
  c.passed = worst >= -1e-9 * 20000;
  c.detail = std::to_string(trials) + " populations, worst margin " +
             fmt(worst);
  return c;
}

OracleCheck check_coverage(const OracleOptions& opt) {
  // Multinomial resampling around a fixed table: the chi-square filter at
  // the 95% level should accept 93-97% of draws.
  const Counts2x2 x0{120, 260, 410, 210};
  const CovMatrix4 cov = multinomial_covariance(x0);
  const double crit = chi2_quantile_df3(0.95);
  const std::int64_t reps = opt.quick ? 4000 : 20000;
  const std::uint64_t n = x0.total();
  const double dn = static_cast<double>(n);
  const std::array<double, 4> p = {x0.x01 / dn, x0.x11 / dn, x0.x00 / dn,
                                   x0.x10 / dn};
  std::vector<std::uint8_t> inside(static_cast<std::size_t>(reps), 0);
#pragma omp parallel for schedule(static) if (opt.parallel)
  for (std::int64_t i = 0; i < reps; ++i) {
    Philox4x32 rng(opt.seed, 0x800000 + static_cast<std::uint64_t>(i));
    const auto x = sample_multinomial4(rng, n, p);
    Vec4 d;
    d[0] = static_cast<double>(x[0]) - static_cast<double>(x0.x01);
    d[1] = static_cast<double>(x[1]) - static_cast<double>(x0.x11);
    d[2] = static_cast<double>(x[2]) - static_cast<double>(x0.x00);
    d[3] = static_cast<double>(x[3]) - static_cast<double>(x0.x10);
    if (quad_form(cov.pinv, d) < crit)
      inside[static_cast<std::size_t>(i)] = 1;
  }
  std::int64_t count = 0;
  for (auto v : inside) count += v;
  const double rate = static_cast<double>(count) / static_cast<double>(reps);

  // Conservativeness: per-individual sampling from a heterogeneous null
  // population is accepted at least as often.
  const auto pop = random_null_population(opt.seed, 0x900000, 1000, 1000);
  const Probs2x2 cells = expected_cells(pop);
  const std::int64_t reps2 = opt.quick ? 2000 : 8000;
  std::vector<std::uint8_t> inside2(static_cast<std::size_t>(reps2), 0);
  const double pn = static_cast<double>(pop.individuals.size());
  const Vec4 mean_counts = {cells.p01 * pn, cells.p11 * pn, cells.p00 * pn,
                            cells.p10 * pn};
  Mat4 mult_cov{};
  {
    const Vec4 pb = {cells.p01, cells.p11, cells.p00, cells.p10};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        mult_cov[a][b] =
            a == b ? pn * pb[a] * (1 - pb[a]) : -pn * pb[a] * pb[b];
  }
  const Mat4 mult_pinv = pseudo_inverse(mult_cov);
#pragma omp parallel for schedule(static) if (opt.parallel)
  for (std::int64_t i = 0; i < reps2; ++i) {
    Philox4x32 rng(opt.seed, 0xA00000 + static_cast<std::uint64_t>(i));
    Vec4 counts{};
    for (const auto& ind : pop.individuals) {
      const bool e = rng.next_double() < ind.pi;
      const bool d = rng.next_double() < (e ? ind.r1 : ind.r0);
      if (!e && d) counts[0] += 1;
      else if (e && d) counts[1] += 1;
      else if (!e && !d) counts[2] += 1;
      else counts[3] += 1;
    }
    Vec4 diff;
    for (int a = 0; a < 4; ++a) diff[a] = counts[a] - mean_counts[a];
    if (quad_form(mult_pinv, diff) < crit)
      inside2[static_cast<std::size_t>(i)] = 1;
  }
  std::int64_t count2 = 0;
  for (auto v : inside2) count2 += v;
  const double rate2 =
      static_cast<double>(count2) / static_cast<double>(reps2);

  OracleCheck c;
  c.name = "chi-square region coverage";
  c.passed = rate >= 0.93 && rate <= 0.97 && rate2 >= 0.94;
  c.detail = "multinomial " + fmt(rate) + ", per-individual " + fmt(rate2);
  return c;
}

OracleCheck check_penrose(const OracleOptions& opt) {
  const int trials = opt.quick ? 40 : 150;
  double worst = 0;
  for (int i = 0; i < trials; ++i) {
    Philox4x32 rng(opt.seed, 0xB00000 + static_cast<std::uint64_t>(i));
    // Random rank-3 PSD with zero row sums, the shape the filter uses.
    Mat4 a{};
    for (int k = 0; k < 3; ++k) {
      Vec4 v;
      double sum = 0;
      for (int j = 0; j < 4; ++j) {
        v[j] = uniform_in(rng, -1, 1);
        sum += v[j];
      }
      for (int j = 0; j < 4; ++j) v[j] -= sum / 4;
      const double w = uniform_in(rng, 0.1, 5);
      for (int r = 0; r < 4; ++r)
        for (int s = 0; s < 4; ++s) a[r][s] += w * v[r] * v[s];
    }
    const Mat4 ap = pseudo_inverse(a);
    const Mat4 a_ap_a = matmul(matmul(a, ap), a);
    const Mat4 ap_a_ap = matmul(matmul(ap, a), ap);
    const Mat4 a_ap = matmul(a, ap);
    const Mat4 ap_a = matmul(ap, a);
    for (int r = 0; r < 4; ++r)
      for (int s = 0; s < 4; ++s) {
        worst = std::max(worst, std::abs(a_ap_a[r][s] - a[r][s]));
        worst = std::max(worst, std::abs(ap_a_ap[r][s] - ap[r][s]));
        worst = std::max(worst, std::abs(a_ap[r][s] - a_ap[s][r]));
        worst = std::max(worst, std::abs(ap_a[r][s] - ap_a[s][r]));
      }
  }
  OracleCheck c;
  c.name = "pseudo-inverse Penrose identities";
  c.passed = worst < 1e-8;
  c.detail = std::to_string(trials) + " matrices, worst residual " +
             fmt(worst);
  return c;
}

OracleCheck check_chi2_contract(const OracleOptions&) {
  double worst = 0;
  for (int i = 1; i < 1000; ++i) {
    const double p = i / 1000.0;
    worst = std::max(worst, std::abs(chi2_cdf_df3(chi2_quantile_df3(p)) - p));
  }
  OracleCheck c;
  c.name = "chi-square quantile round trip";
  c.passed = worst < 1e-10;
  c.detail = "worst |CDF(quantile(p)) - p| " + fmt(worst);
  return c;
}

}  // namespace

OracleReport run_oracle_suite(const OracleOptions& options) {
  OracleReport report;
  report.checks.push_back(check_branch_consistency(options));
  report.checks.push_back(check_threshold_soundness(options));
  report.checks.push_back(check_near_tightness(options));
  report.checks.push_back(check_lemma_a1(options));
  report.checks.push_back(check_lemma_a2(options));
  report.checks.push_back(check_prop_a3(options));
  report.checks.push_back(check_loewner(options));
  report.checks.push_back(check_diagonal_dominance(options));
  report.checks.push_back(check_coverage(options));
  report.checks.push_back(check_penrose(options));
  report.checks.push_back(check_chi2_contract(options));
  return report;
}

}  // namespace octest
