#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "octest/mat4.hpp"
#include "octest/tables.hpp"

namespace octest {

struct ResampleConfig {
  double alpha = 0.05;
  std::uint64_t num_samples = 100000;
  std::uint64_t seed = 0;
};

/// Covariance of multinomial cell counts at the observed table, with its
/// Moore-Penrose pseudo-inverse. Rank is at most 3 (rows sum to zero).
struct CovMatrix4 {
  Mat4 sigma{};
  Mat4 pinv{};
  int rank = 0;
};

struct FpcResult {
  double t_n = 0;            // max T over the chi-square confidence region
  double t_point = 0;        // T at the observed table
  double quantile_alt = 0;   // 1-alpha quantile of all synthetic T values
  double se_alt = 0;         // standard deviation of all synthetic T values
  std::uint64_t accepted_count = 0;    // samples inside the region
  std::uint64_t degenerate_count = 0;  // samples with a boundary marginal
  ResampleConfig config;
};

CovMatrix4 multinomial_covariance(const Counts2x2& x0);

/// 1 - |phi| straight from raw cell counts; empty when either marginal sits
/// on the boundary. Zero cells are fine as long as the marginals are
/// interior.
std::optional<double> threshold_from_cells(const std::array<std::uint64_t, 4>& x);

/// Corrected threshold by constrained multinomial resampling: draws
/// synthetic tables from Mult(n, x0/n), keeps those inside the chi-square
/// confidence region around x0, and maximizes T over them. The two
/// alternative summaries (quantile of all T values, their standard
/// deviation) come from the same pass. Deterministic given config.seed;
/// parallel and serial paths produce identical results.
FpcResult fpc_threshold(const Counts2x2& x0, const ResampleConfig& config);

/// Serial reference implementation of the same contract, kept for testing
/// the parallel kernel against.
FpcResult fpc_threshold_serial(const Counts2x2& x0,
                               const ResampleConfig& config);

namespace detail {

/// Per-sample resampling kernel outputs, indexed by sample id.
struct SampleRecord {
  double t = 0;
  bool t_defined = false;
  bool accepted = false;
};

/// Fills records[i] from substream (seed, i). `parallel` toggles the OpenMP
/// path; results are identical either way.
void resample_kernel(const Counts2x2& x0, const Mat4& pinv, double chi2_crit,
                     std::uint64_t seed, std::vector<SampleRecord>& records,
                     bool parallel);

}  // namespace detail

}  // namespace octest
