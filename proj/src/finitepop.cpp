#include "octest/finitepop.hpp"

#include <algorithm>
#include <cmath>

#include "octest/chi2.hpp"
#include "octest/errors.hpp"
#include "octest/rng.hpp"

namespace octest {

CovMatrix4 multinomial_covariance(const Counts2x2& x0) {
  const std::uint64_t n = x0.total();
  if (n == 0) throw EmptyTable("observed table is empty");
  const double dn = static_cast<double>(n);
  const Vec4 p = {x0.x01 / dn, x0.x11 / dn, x0.x00 / dn, x0.x10 / dn};
  CovMatrix4 out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      out.sigma[i][j] = i == j ? dn * p[i] * (1 - p[i]) : -dn * p[i] * p[j];
  out.pinv = pseudo_inverse(out.sigma);
  out.rank = rank_sym(out.sigma);
  return out;
}

std::optional<double> threshold_from_cells(
    const std::array<std::uint64_t, 4>& x) {
  const std::uint64_t n = x[0] + x[1] + x[2] + x[3];
  if (n == 0) return std::nullopt;
  const double dn = static_cast<double>(n);
  const double p01 = x[0] / dn;
  const double p11 = x[1] / dn;
  const double p00 = x[2] / dn;
  const double p10 = x[3] / dn;
  const double pe = p11 + p10;
  const double pd = p01 + p11;
  if (pe <= 0 || pe >= 1 || pd <= 0 || pd >= 1) return std::nullopt;
  const double ph =
      (p11 * p00 - p01 * p10) / std::sqrt(pe * (1 - pe) * pd * (1 - pd));
  return 1.0 - std::abs(ph);
}

namespace detail {

void resample_kernel(const Counts2x2& x0, const Mat4& pinv, double chi2_crit,
                     std::uint64_t seed, std::vector<SampleRecord>& records,
                     bool parallel) {
  const std::uint64_t n = x0.total();
  const double dn = static_cast<double>(n);
  const std::array<double, 4> p = {x0.x01 / dn, x0.x11 / dn, x0.x00 / dn,
                                   x0.x10 / dn};
  const Vec4 observed = {static_cast<double>(x0.x01),
                         static_cast<double>(x0.x11),
                         static_cast<double>(x0.x00),
                         static_cast<double>(x0.x10)};
  const std::int64_t count = static_cast<std::int64_t>(records.size());

#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t i = 0; i < count; ++i) {
    Philox4x32 rng(seed, static_cast<std::uint64_t>(i));
    const auto x = sample_multinomial4(rng, n, p);
    Vec4 diff;
    for (int k = 0; k < 4; ++k) diff[k] = static_cast<double>(x[k]) - observed[k];
    const double q = quad_form(pinv, diff);
    SampleRecord rec;
    const auto t = threshold_from_cells(x);
    rec.t_defined = t.has_value();
    rec.t = t.value_or(0.0);
    rec.accepted = rec.t_defined && q < chi2_crit;
    records[static_cast<std::size_t>(i)] = rec;
  }
}

}  // namespace detail

namespace {

FpcResult run_fpc(const Counts2x2& x0, const ResampleConfig& config,
                  bool parallel) {
  if (x0.x01 == 0 || x0.x11 == 0 || x0.x00 == 0 || x0.x10 == 0) {
    throw ZeroCell("resampling needs every observed cell positive");
  }
  if (!(config.alpha > 0 && config.alpha < 1)) {
    throw DomainError("alpha must lie in (0,1)");
  }
  if (config.num_samples == 0) {
    throw DomainError("num_samples must be positive");
  }

  const CovMatrix4 cov = multinomial_covariance(x0);
  const double crit = chi2_quantile_df3(1 - config.alpha);

  std::vector<detail::SampleRecord> records(config.num_samples);
  detail::resample_kernel(x0, cov.pinv, crit, config.seed, records, parallel);

  FpcResult out;
  out.config = config;
  out.t_point =
      threshold_from_cells({x0.x01, x0.x11, x0.x00, x0.x10}).value();

  // The observed table always lies in the region (q = 0), so the maximum
  // starts from T(x0).
  double t_max = out.t_point;
  std::vector<double> all_t;
  all_t.reserve(records.size());
  for (const auto& rec : records) {
    if (!rec.t_defined) {
      ++out.degenerate_count;
      continue;
    }
    all_t.push_back(rec.t);
    if (rec.accepted) {
      ++out.accepted_count;
      t_max = std::max(t_max, rec.t);
    }
  }
  out.t_n = t_max;

  if (all_t.empty()) {
    throw NoAcceptedSamples("every synthetic sample was degenerate");
  }
  std::sort(all_t.begin(), all_t.end());
  // Upper empirical quantile: smallest order statistic with at least
  // (1-alpha) of the mass at or below it.
  const std::size_t m = all_t.size();
  const double target = (1 - config.alpha) * static_cast<double>(m);
  std::size_t idx = static_cast<std::size_t>(std::ceil(target));
  idx = std::min(std::max<std::size_t>(idx, 1), m) - 1;
  out.quantile_alt = all_t[idx];

  double mean = 0;
  for (double t : all_t) mean += t;
  mean /= static_cast<double>(m);
  double ss = 0;
  for (double t : all_t) ss += (t - mean) * (t - mean);
  out.se_alt = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1)) : 0.0;
  return out;
}

}  // namespace

FpcResult fpc_threshold(const Counts2x2& x0, const ResampleConfig& config) {
  return run_fpc(x0, config, true);
}

FpcResult fpc_threshold_serial(const Counts2x2& x0,
                               const ResampleConfig& config) {
  return run_fpc(x0, config, false);
}

}  // namespace octest
