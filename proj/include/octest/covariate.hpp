#pragma once

#include <string>
#include <vector>

#include "octest/tables.hpp"

namespace octest {

/// Per-stratum ingredients of the adjusted-threshold minimization.
struct StratumBounds {
  std::string label;
  double weight = 0;   // stratum share of the population
  double phi2 = 0;     // squared conditional phi
  double var_e = 0;    // conditional Bernoulli variance of e
  double var_d = 0;    // conditional Bernoulli variance of d
  double l2_pi = 0;    // lower bound on the conditional variance of pi
  double u2_pi = 0;    // upper bound (= var_e)
  double l2_r = 0;     // lower bound on the conditional variance of r
  double u2_r = 0;     // upper bound (= var_d)

  double hyperbola() const { return phi2 * var_e * var_d; }
};

struct TauProblem {
  std::vector<StratumBounds> strata;
  double between_var_pi = 0;  // variance of conditional exposure prevalences
  double between_var_r = 0;   // variance of conditional outcome prevalences
  double var_e = 0;           // marginal Bernoulli variance of e
  double var_d = 0;           // marginal Bernoulli variance of d
};

struct StratumOptimum {
  double var_pi = 0;
  double var_r = 0;
};

struct TauSolution {
  double tau = 0;
  double t_c = 1;
  double solver_gap = 0;  // certified bound on |tau - true minimum|
  std::vector<StratumOptimum> per_stratum;
};

/// Assembles the constrained minimization from stratified counts. Throws
/// DegenerateStratum when a conditional marginal sits on the boundary.
TauProblem build_problem(const StratifiedTable& table);

/// Minimizes (A + sum m_c x_c)(B + sum m_c y_c) subject to x_c y_c fixed on
/// each stratum's hyperbola and box. The returned gap is certified by
/// interval bounds; deterministic for a given (problem, tol).
TauSolution solve_tau(const TauProblem& problem, double tol = 1e-4);

/// build_problem + solve_tau + T_c = 1 - sqrt(tau)/(sigma_e sigma_d).
TauSolution threshold_Tc(const StratifiedTable& table, double tol = 1e-4);

}  // namespace octest
