#pragma once

#include <array>

namespace octest {

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;

Mat4 zero4();
Mat4 identity4();
Mat4 matmul(const Mat4& a, const Mat4& b);
Mat4 transpose(const Mat4& a);
double max_abs(const Mat4& a);

/// x^T A x for a 4-vector.
double quad_form(const Mat4& a, const Vec4& x);

struct EigenSym4 {
  Vec4 values{};    // ascending
  Mat4 vectors{};   // column j is the eigenvector of values[j]
};

/// Cyclic Jacobi rotations; off-diagonal mass driven below 1e-12 relative.
/// Throws NotSymmetric when the input asymmetry exceeds 1e-9 relative.
EigenSym4 jacobi_eigen(const Mat4& a);

/// Moore-Penrose pseudo-inverse through the eigendecomposition; eigenvalues
/// with |lambda| < rtol * max|lambda| are treated as zero.
Mat4 pseudo_inverse(const Mat4& a, double rtol = 1e-10);

/// Number of eigenvalues above the rtol cutoff.
int rank_sym(const Mat4& a, double rtol = 1e-10);

}  // namespace octest
