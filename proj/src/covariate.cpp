#include "octest/covariate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "octest/errors.hpp"

namespace octest {

namespace {

constexpr double kFeasSlack = 1e-10;

struct FreeStratum {
  std::size_t index;  // position in problem.strata
  double m = 0;
  double k = 0;
  double lo = 0;
  double hi = 0;
};

double objective(double base_x, double base_y,
                 const std::vector<FreeStratum>& fs,
                 const std::vector<double>& x) {
  double sx = base_x;
  double sy = base_y;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    sx += fs[i].m * x[i];
    sy += fs[i].m * fs[i].k / x[i];
  }
  return sx * sy;
}

bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

struct Incumbent {
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> x;

  void offer(double v, const std::vector<double>& cand) {
    if (v < value || (v == value && (x.empty() || lex_less(cand, x)))) {
      value = v;
      x = cand;
    }
  }
};

// Cyclic coordinate descent; each 1-D slice has the closed-form minimizer
// x* = sqrt(S1 k / S2) with S1, S2 the complementary partial sums.
void polish(double base_x, double base_y, const std::vector<FreeStratum>& fs,
            std::vector<double>& x) {
  const std::size_t kdim = fs.size();
  for (int iter = 0; iter < 200; ++iter) {
    double moved = 0;
    for (std::size_t i = 0; i < kdim; ++i) {
      double s1 = base_x;
      double s2 = base_y;
      for (std::size_t j = 0; j < kdim; ++j) {
        if (j == i) continue;
        s1 += fs[j].m * x[j];
        s2 += fs[j].m * fs[j].k / x[j];
      }
      double best = x[i];
      if (s2 > 0) {
        best = std::sqrt(s1 * fs[i].k / s2);
      }
      best = std::clamp(best, fs[i].lo, fs[i].hi);
      moved = std::max(moved, std::abs(best - x[i]));
      x[i] = best;
    }
    if (moved < 1e-16) break;
  }
}

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
  double lower_bound = 0;
  std::uint64_t id = 0;
};

struct BoxOrder {
  bool operator()(const Box& a, const Box& b) const {
    if (a.lower_bound != b.lower_bound) return a.lower_bound > b.lower_bound;
    return a.id > b.id;
  }
};

double box_lower_bound(double base_x, double base_y,
                       const std::vector<FreeStratum>& fs, const Box& b) {
  // The first factor is minimized at the low corner, the second at the
  // high corner; the product of the two minima bounds the box from below.
  double sx = base_x;
  double sy = base_y;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    sx += fs[i].m * b.lo[i];
    sy += fs[i].m * fs[i].k / b.hi[i];
  }
  return sx * sy;
}

}  // namespace

TauProblem build_problem(const StratifiedTable& table) {
  if (table.strata.empty()) throw EmptyTable("no strata");
  const double total = static_cast<double>(table.total());
  if (total == 0) throw EmptyTable("stratified table has no observations");

  const Counts2x2 pooled = table.pooled();
  const double p_e = static_cast<double>(pooled.exposed()) / total;
  const double p_d = static_cast<double>(pooled.with_outcome()) / total;
  if (p_e <= 0 || p_e >= 1 || p_d <= 0 || p_d >= 1) {
    throw DegenerateMarginal("pooled marginals must be interior");
  }

  TauProblem prob;
  prob.var_e = p_e * (1 - p_e);
  prob.var_d = p_d * (1 - p_d);

  for (const auto& s : table.strata) {
    const double n_c = static_cast<double>(s.counts.total());
    if (n_c == 0) {
      throw DegenerateStratum("stratum '" + s.label + "' is empty");
    }
    const double p01 = s.counts.x01 / n_c;
    const double p11 = s.counts.x11 / n_c;
    const double p00 = s.counts.x00 / n_c;
    const double p10 = s.counts.x10 / n_c;
    const double pe_c = p11 + p10;
    const double pd_c = p01 + p11;
    if (pe_c <= 0 || pe_c >= 1 || pd_c <= 0 || pd_c >= 1) {
      throw DegenerateStratum("stratum '" + s.label +
                              "' has a boundary conditional marginal");
    }

    StratumBounds b;
    b.label = s.label;
    b.weight = n_c / total;
    b.var_e = pe_c * (1 - pe_c);
    b.var_d = pd_c * (1 - pd_c);
    const double phi_c = (p11 * p00 - p01 * p10) / std::sqrt(b.var_e * b.var_d);
    b.phi2 = phi_c * phi_c;

    const double pe_d1 = p11 / pd_c;        // P(e=1 | d=1, c)
    const double pe_d0 = p10 / (1 - pd_c);  // P(e=1 | d=0, c)
    b.l2_pi = pd_c * (pe_d1 - pe_c) * (pe_d1 - pe_c) +
              (1 - pd_c) * (pe_d0 - pe_c) * (pe_d0 - pe_c);
    b.u2_pi = b.var_e;

    const double pd_e1 = p11 / pe_c;        // P(d=1 | e=1, c)
    const double pd_e0 = p01 / (1 - pe_c);  // P(d=1 | e=0, c)
    b.l2_r = pe_c * (pd_e1 - pd_c) * (pd_e1 - pd_c) +
             (1 - pe_c) * (pd_e0 - pd_c) * (pd_e0 - pd_c);
    b.u2_r = b.var_d;

    // The hyperbola constant must meet the box: l2 products below, u2 above.
    const double k = b.hyperbola();
    if (b.l2_pi * b.l2_r > k + kFeasSlack || k > b.u2_pi * b.u2_r + kFeasSlack) {
      throw Infeasible("stratum '" + s.label +
                       "' bounds do not intersect its hyperbola");
    }

    prob.between_var_pi += b.weight * (pe_c - p_e) * (pe_c - p_e);
    prob.between_var_r += b.weight * (pd_c - p_d) * (pd_c - p_d);
    prob.strata.push_back(std::move(b));
  }
  return prob;
}

TauSolution solve_tau(const TauProblem& problem, double tol) {
  if (problem.strata.empty()) throw EmptyTable("problem has no strata");
  if (!(tol > 0)) throw DomainError("tolerance must be positive");

  double base_x = problem.between_var_pi;
  double base_y = problem.between_var_r;

  TauSolution sol;
  sol.per_stratum.resize(problem.strata.size());

  // Strata with phi = 0 collapse to (0,0); strata whose feasible interval
  // is a point are fixed. The rest enter the search.
  std::vector<FreeStratum> fs;
  for (std::size_t i = 0; i < problem.strata.size(); ++i) {
    const auto& b = problem.strata[i];
    const double k = b.hyperbola();
    if (k <= 0) {
      if (b.l2_pi > kFeasSlack && b.l2_r > kFeasSlack) {
        throw Infeasible("stratum '" + b.label +
                         "' has a zero hyperbola but positive lower bounds");
      }
      sol.per_stratum[i] = {0.0, 0.0};
      continue;
    }
    FreeStratum f;
    f.index = i;
    f.m = b.weight;
    f.k = k;
    f.lo = std::max(b.l2_pi, b.u2_r > 0 ? k / b.u2_r : b.l2_pi);
    f.hi = std::min(b.u2_pi, b.l2_r > 0 ? k / b.l2_r : b.u2_pi);
    if (f.lo > f.hi) {
      if (f.lo > f.hi + kFeasSlack) {
        throw Infeasible("stratum '" + b.label +
                         "' has an empty feasible interval");
      }
      f.lo = f.hi = 0.5 * (f.lo + f.hi);
    }
    if (f.hi - f.lo < 1e-15 * std::max(1.0, f.hi)) {
      const double x = 0.5 * (f.lo + f.hi);
      sol.per_stratum[i] = {x, k / x};
      base_x += f.m * x;
      base_y += f.m * (k / x);
      continue;
    }
    fs.push_back(f);
  }

  Incumbent best;
  const std::size_t kdim = fs.size();
  if (kdim == 0) {
    sol.tau = base_x * base_y;
    sol.solver_gap = 0;
  } else {
    // Grid seed (the few-strata path), then coordinate-descent polish.
    const int grid_n = kdim == 1 ? 4096 : kdim == 2 ? 96 : kdim == 3 ? 28 : 12;
    std::size_t cells = 1;
    for (std::size_t i = 0; i < kdim && kdim <= 4; ++i) cells *= grid_n;
    if (kdim <= 4) {
      const std::int64_t count = static_cast<std::int64_t>(cells);
      double grid_best = std::numeric_limits<double>::infinity();
      std::int64_t grid_best_id = -1;
#pragma omp parallel
      {
        double local_best = std::numeric_limits<double>::infinity();
        std::int64_t local_id = -1;
#pragma omp for schedule(static) nowait
        for (std::int64_t cell = 0; cell < count; ++cell) {
          std::int64_t rem = cell;
          double sx = base_x;
          double sy = base_y;
          for (std::size_t i = 0; i < kdim; ++i) {
            const int g = static_cast<int>(rem % grid_n);
            rem /= grid_n;
            const double x =
                fs[i].lo + (fs[i].hi - fs[i].lo) * g / (grid_n - 1);
            sx += fs[i].m * x;
            sy += fs[i].m * fs[i].k / x;
          }
          const double v = sx * sy;
          if (v < local_best || (v == local_best && cell < local_id)) {
            local_best = v;
            local_id = cell;
          }
        }
#pragma omp critical
        {
          if (local_best < grid_best ||
              (local_best == grid_best && local_id < grid_best_id)) {
            grid_best = local_best;
            grid_best_id = local_id;
          }
        }
      }
      std::vector<double> x(kdim);
      std::int64_t rem = grid_best_id;
      for (std::size_t i = 0; i < kdim; ++i) {
        const int g = static_cast<int>(rem % grid_n);
        rem /= grid_n;
        x[i] = fs[i].lo + (fs[i].hi - fs[i].lo) * g / (grid_n - 1);
      }
      polish(base_x, base_y, fs, x);
      best.offer(objective(base_x, base_y, fs, x), x);
    }

    // Branch and bound certifies the gap for any number of strata.
    std::priority_queue<Box, std::vector<Box>, BoxOrder> open;
    std::uint64_t next_id = 0;
    Box root;
    for (const auto& f : fs) {
      root.lo.push_back(f.lo);
      root.hi.push_back(f.hi);
    }
    root.id = next_id++;
    root.lower_bound = box_lower_bound(base_x, base_y, fs, root);
    {
      std::vector<double> mid(kdim);
      for (std::size_t i = 0; i < kdim; ++i)
        mid[i] = 0.5 * (root.lo[i] + root.hi[i]);
      polish(base_x, base_y, fs, mid);
      best.offer(objective(base_x, base_y, fs, mid), mid);
    }
    open.push(root);

    double certified_lb = root.lower_bound;
    bool reached_tol = false;
    const std::uint64_t node_budget = 4000000;
    std::uint64_t nodes = 0;
    while (!open.empty() && nodes < node_budget) {
      Box box = open.top();
      open.pop();
      certified_lb = box.lower_bound;
      if (best.value - certified_lb <= tol) {
        reached_tol = true;
        break;
      }
      ++nodes;

      // Split the relatively widest dimension.
      std::size_t dim = 0;
      double widest = -1;
      for (std::size_t i = 0; i < kdim; ++i) {
        const double w = (box.hi[i] - box.lo[i]) / box.hi[i];
        if (w > widest) {
          widest = w;
          dim = i;
        }
      }
      const double mid = 0.5 * (box.lo[dim] + box.hi[dim]);
      for (int side = 0; side < 2; ++side) {
        Box child = box;
        (side == 0 ? child.hi : child.lo)[dim] = mid;
        child.id = next_id++;
        child.lower_bound = box_lower_bound(base_x, base_y, fs, child);
        if (child.lower_bound >= best.value) continue;
        std::vector<double> probe(kdim);
        for (std::size_t i = 0; i < kdim; ++i)
          probe[i] = 0.5 * (child.lo[i] + child.hi[i]);
        polish(base_x, base_y, fs, probe);
        best.offer(objective(base_x, base_y, fs, probe), probe);
        open.push(child);
      }
    }
    if (!reached_tol) {
      // Queue drained: every remaining region was pruned against the
      // incumbent, so the incumbent is the minimum. Budget exhausted: the
      // open boxes carry the certificate.
      certified_lb = open.empty() ? best.value : open.top().lower_bound;
    }

    sol.tau = best.value;
    sol.solver_gap = std::max(0.0, best.value - certified_lb);
    for (std::size_t i = 0; i < kdim; ++i) {
      sol.per_stratum[fs[i].index] = {best.x[i], fs[i].k / best.x[i]};
    }
  }

  const double denom = std::sqrt(problem.var_e * problem.var_d);
  sol.t_c = 1.0 - std::sqrt(sol.tau) / denom;
  return sol;
}

TauSolution threshold_Tc(const StratifiedTable& table, double tol) {
  return solve_tau(build_problem(table), tol);
}

}  // namespace octest
