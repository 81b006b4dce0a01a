#pragma once

#include <array>
#include <complex>
#include <vector>

namespace hgwm {

using complex_t = std::complex<double>;
using cvector = std::vector<complex_t>;

inline constexpr complex_t kI{0.0, 1.0};

/// Unknown parameter pair: transverse displacement d (length) and momentum
/// kick k (inverse length), hbar = 1.
struct ParamVector {
  double d = 0.0;
  double k = 0.0;
};

/// Dense 2x2 real matrix, row-major. Index 0 is d, index 1 is k.
struct Mat2 {
  std::array<std::array<double, 2>, 2> a{};

  static Mat2 diag(double x, double y) { return Mat2{{{{x, 0.0}, {0.0, y}}}}; }
  static Mat2 symmetric(double xx, double xy, double yy) {
    return Mat2{{{{xx, xy}, {xy, yy}}}};
  }

  double& operator()(int r, int c) { return a[r][c]; }
  double operator()(int r, int c) const { return a[r][c]; }

  double trace() const { return a[0][0] + a[1][1]; }
  double det() const { return a[0][0] * a[1][1] - a[0][1] * a[1][0]; }

  Mat2 operator*(double s) const {
    Mat2 r = *this;
    for (auto& row : r.a)
      for (auto& v : row) v *= s;
    return r;
  }
  Mat2 operator+(const Mat2& o) const {
    Mat2 r = *this;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r.a[i][j] += o.a[i][j];
    return r;
  }
  Mat2 operator*(const Mat2& o) const {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r.a[i][j] = a[i][0] * o.a[0][j] + a[i][1] * o.a[1][j];
    return r;
  }
};

/// Eigen-decomposition of a real symmetric 2x2 matrix. Eigenvalues ascending;
/// vectors[i] is the unit eigenvector for values[i].
struct SymEigen2 {
  std::array<double, 2> values{};
  std::array<std::array<double, 2>, 2> vectors{};
};

SymEigen2 eigen_symmetric(const Mat2& m);

}  // namespace hgwm
