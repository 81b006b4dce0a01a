#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hgwm/types.hpp"

namespace hgwm {

/// Highest Hermite-Gaussian order the library supports.
inline constexpr int kMaxOrder = 64;

/// Uniform position grid with trapezoid weights.
///
/// Built for a given beam width and maximum H-G order; construction verifies
/// that every mode up to that order integrates to one within 1e-10.
struct Grid {
  std::vector<double> points;
  std::vector<double> weights;
  double extent = 0.0;  // half-width, length units
  double sigma = 1.0;
  int n_max = 0;

  std::size_t size() const { return points.size(); }
  double spacing() const { return points.size() > 1 ? points[1] - points[0] : 0.0; }
};

/// Pointer state as coefficients over phi_0 .. phi_{m_max}.
struct HGState {
  cvector coeffs;
  double sigma = 1.0;

  int m_max() const { return static_cast<int>(coeffs.size()) - 1; }
  double norm() const;
  HGState& normalize();
  HGState normalized() const {
    HGState s = *this;
    s.normalize();
    return s;
  }
  complex_t coeff(int m) const {
    return (m >= 0 && m < static_cast<int>(coeffs.size())) ? coeffs[m] : complex_t{};
  }

  static HGState mode(int n, double sigma);
};

/// Physicists' Hermite polynomial H_n(y) by three-term recurrence.
double hermite_poly(int n, double y);

/// Normalized H-G wavefunction
/// phi_n(x) = (2 pi sigma^2)^{-1/4} (2^n n!)^{-1/2} H_n(x / sqrt(2) sigma) exp(-x^2 / 4 sigma^2).
/// Evaluated through the normalized recurrence, so no factorials appear.
double hg_wavefunction(int n, double sigma, double x);

/// d/dx phi_n(x), from the ladder relation.
double hg_wavefunction_derivative(int n, double sigma, double x);

/// Fills out[m] = phi_m(x) for m = 0 .. out.size()-1.
void hg_wavefunctions(double sigma, double x, std::span<double> out);

Grid make_grid(int n_max, double sigma, std::size_t size);

/// Grid valid for orders up to 12 with 4096 nodes.
Grid default_grid(double sigma = 1.0);

/// sum_j w_j conj(a_j) b_j
complex_t inner_product(std::span<const complex_t> a, std::span<const complex_t> b, const Grid& g);

/// <a|b> in the H-G basis. Both states must share sigma.
complex_t inner_product(const HGState& a, const HGState& b);

enum class LadderOp { position, derivative };

/// Applies x or d/dx to a state in the H-G basis. The result has one more
/// order than the input and is not renormalized.
HGState ladder_apply(LadderOp op, const HGState& s);

/// Samples a basis state on the grid.
cvector to_grid(const HGState& s, const Grid& g);

/// Real samples of a single mode on the grid.
std::vector<double> mode_on_grid(int n, const Grid& g);

/// Projects grid amplitudes onto phi_0 .. phi_{m_max} by quadrature.
HGState project(std::span<const complex_t> amplitudes, const Grid& g, int m_max);

}  // namespace hgwm
