#include "octest/mat4.hpp"

#include <cmath>

#include "octest/errors.hpp"

namespace octest {

namespace {

constexpr double kJacobiTol = 1e-12;
constexpr int kMaxSweeps = 64;

double offdiag_norm(const Mat4& a) {
  double s = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) s += a[i][j] * a[i][j];
  return std::sqrt(s);
}

}  // namespace

Mat4 zero4() {
  Mat4 m{};
  return m;
}

Mat4 identity4() {
  Mat4 m{};
  for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
  return m;
}

Mat4 matmul(const Mat4& a, const Mat4& b) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) {
      const double aik = a[i][k];
      for (int j = 0; j < 4; ++j) c[i][j] += aik * b[k][j];
    }
  return c;
}

Mat4 transpose(const Mat4& a) {
  Mat4 t{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) t[i][j] = a[j][i];
  return t;
}

double max_abs(const Mat4& a) {
  double m = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m = std::max(m, std::abs(a[i][j]));
  return m;
}

double quad_form(const Mat4& a, const Vec4& x) {
  double s = 0;
  for (int i = 0; i < 4; ++i) {
    double row = 0;
    for (int j = 0; j < 4; ++j) row += a[i][j] * x[j];
    s += x[i] * row;
  }
  return s;
}

EigenSym4 jacobi_eigen(const Mat4& input) {
  const double scale = std::max(1.0, max_abs(input));
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (std::abs(input[i][j] - input[j][i]) > 1e-9 * scale) {
        throw NotSymmetric("matrix is not symmetric");
      }

  Mat4 a = input;
  // Symmetrize residual rounding so rotations stay exact.
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const double v = 0.5 * (a[i][j] + a[j][i]);
      a[i][j] = a[j][i] = v;
    }

  Mat4 v = identity4();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (offdiag_norm(a) <= kJacobiTol * scale) break;
    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        const double apq = a[p][q];
        if (std::abs(apq) <= kJacobiTol * scale * 1e-4) continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1.0 / std::sqrt(t * t + 1);
        const double s = t * c;
        for (int k = 0; k < 4; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 4; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 4; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  EigenSym4 out;
  std::array<int, 4> order{0, 1, 2, 3};
  std::array<double, 4> lam{a[0][0], a[1][1], a[2][2], a[3][3]};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (lam[order[j]] < lam[order[i]]) std::swap(order[i], order[j]);
  for (int j = 0; j < 4; ++j) {
    out.values[j] = lam[order[j]];
    for (int i = 0; i < 4; ++i) out.vectors[i][j] = v[i][order[j]];
  }
  return out;
}

Mat4 pseudo_inverse(const Mat4& a, double rtol) {
  const EigenSym4 eig = jacobi_eigen(a);
  double lmax = 0;
  for (double l : eig.values) lmax = std::max(lmax, std::abs(l));
  Mat4 out{};
  if (lmax == 0) return out;  // pinv of the zero matrix is zero
  for (int k = 0; k < 4; ++k) {
    const double l = eig.values[k];
    if (std::abs(l) < rtol * lmax) continue;
    const double inv = 1.0 / l;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        out[i][j] += inv * eig.vectors[i][k] * eig.vectors[j][k];
  }
  return out;
}

int rank_sym(const Mat4& a, double rtol) {
  const EigenSym4 eig = jacobi_eigen(a);
  double lmax = 0;
  for (double l : eig.values) lmax = std::max(lmax, std::abs(l));
  if (lmax == 0) return 0;
  int r = 0;
  for (double l : eig.values)
    if (std::abs(l) >= rtol * lmax) ++r;
  return r;
}

}  // namespace octest
