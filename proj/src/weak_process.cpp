#include "hgwm/weak_process.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hgwm/errors.hpp"

namespace hgwm {

namespace {

constexpr double kTol = 1e-12;

double spinor_norm(const Spinor& s) { return std::sqrt(std::norm(s[0]) + std::norm(s[1])); }

complex_t braket(const Spinor& bra, const Spinor& ket) {
  return std::conj(bra[0]) * ket[0] + std::conj(bra[1]) * ket[1];
}

Spinor apply(const Operator2& op, const Spinor& v) {
  return {op[0][0] * v[0] + op[0][1] * v[1], op[1][0] * v[0] + op[1][1] * v[1]};
}

struct Eigen2 {
  std::array<double, 2> values;
  std::array<Spinor, 2> vectors;
};

Eigen2 eigen_hermitian(const Operator2& h) {
  const double a = h[0][0].real();
  const double c = h[1][1].real();
  const complex_t b = h[0][1];
  const double mean = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), std::abs(b));
  Eigen2 e;
  e.values = {mean - radius, mean + radius};
  if (std::abs(b) <= kTol * std::max({1.0, std::abs(a), std::abs(c)})) {
    // already diagonal
    if (a <= c) {
      e.vectors = {Spinor{1.0, 0.0}, Spinor{0.0, 1.0}};
    } else {
      e.vectors = {Spinor{0.0, 1.0}, Spinor{1.0, 0.0}};
    }
    e.values = {std::min(a, c), std::max(a, c)};
    return e;
  }
  for (int i = 0; i < 2; ++i) {
    Spinor v{b, complex_t(e.values[i] - a)};
    const double nrm = spinor_norm(v);
    e.vectors[i] = {v[0] / nrm, v[1] / nrm};
  }
  return e;
}

}  // namespace

Selection::Selection(Spinor pre, Spinor post, Operator2 observable)
    : pre_(pre), post_(post), observable_(observable) {
  if (std::abs(spinor_norm(pre_) - 1.0) > kTol) throw DomainError("pre-selection spinor is not normalized");
  if (std::abs(spinor_norm(post_) - 1.0) > kTol) throw DomainError("post-selection spinor is not normalized");
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      if (std::abs(observable_[r][c] - std::conj(observable_[c][r])) > kTol)
        throw DomainError("observable is not Hermitian");
}

complex_t Selection::overlap() const { return braket(post_, pre_); }

complex_t Selection::transition_element() const { return braket(post_, apply(observable_, pre_)); }

Operator2 observable_matrix(Observable which) {
  switch (which) {
    case Observable::pauli_z:
      return Operator2{{{1.0, 0.0}, {0.0, -1.0}}};
    case Observable::pauli_z_plus_identity:
      return Operator2{{{2.0, 0.0}, {0.0, 0.0}}};
    case Observable::identity:
      return Operator2{{{1.0, 0.0}, {0.0, 1.0}}};
  }
  throw DomainError("unknown observable");
}

Selection polarization_selection(double epsilon, Observable which) {
  const double r = 1.0 / std::numbers::sqrt2;
  const double angle = std::numbers::pi / 4.0 + epsilon / 2.0;
  const Spinor pre{r, r};
  const Spinor post{std::polar(std::cos(angle), epsilon / 2.0), -std::polar(std::sin(angle), -epsilon / 2.0)};
  return Selection(pre, post, observable_matrix(which));
}

complex_t weak_value(const Selection& s) {
  const complex_t ov = s.overlap();
  if (std::abs(ov) <= kTol) throw DomainError("vanishing overlap <f|i>: weak value undefined");
  return s.transition_element() / ov;
}

double postselect_probability(const Selection& s) {
  const double p = std::norm(s.overlap());
  if (!(p > 0.0)) throw DomainError("vanishing overlap <f|i>: post-selection never succeeds");
  return p;
}

FirstOrderValidity first_order_validity(const ParamVector& g, double sigma) {
  const double scale = std::max(std::abs(g.d) / sigma, std::abs(g.k) * sigma);
  if (scale > 0.1) return FirstOrderValidity::reject;
  if (scale > 0.01) return FirstOrderValidity::warn;
  return FirstOrderValidity::ok;
}

HGState first_order_unnormalized(int n, double sigma, complex_t aw, const ParamVector& g) {
  HGState s = HGState::mode(n, sigma);
  if (first_order_validity(g, sigma) == FirstOrderValidity::reject)
    throw DomainError("parameters too large for the first-order model: |d|/sigma=" +
                      std::to_string(std::abs(g.d) / sigma) + ", |k|sigma=" + std::to_string(std::abs(g.k) * sigma));
  s.coeffs.resize(n + 2);
  const complex_t disp = aw * g.d / (2.0 * sigma);
  const complex_t kick = kI * aw * sigma * g.k;
  if (n > 0) s.coeffs[n - 1] = -(disp + kick) * std::sqrt(static_cast<double>(n));
  s.coeffs[n + 1] = (disp - kick) * std::sqrt(n + 1.0);
  return s;
}

HGState final_state_first_order(int n, double sigma, complex_t aw, const ParamVector& g) {
  return first_order_unnormalized(n, sigma, aw, g).normalize();
}

ExactFinalState final_state_exact(const Selection& s, int n, double sigma, const ParamVector& g, const Grid& grid) {
  if (n < 0 || n > kMaxOrder) throw DomainError("H-G order out of range");
  const Eigen2 eig = eigen_hermitian(s.observable());
  const double max_shift = std::max(std::abs(eig.values[0]), std::abs(eig.values[1])) * std::abs(g.d);
  if (max_shift >= 0.1 * grid.extent)
    throw DomainError("grid extent " + std::to_string(grid.extent) + " does not cover displacement " +
                      std::to_string(max_shift));

  ExactFinalState out;
  out.amplitudes.assign(grid.size(), complex_t{});
  std::vector<double> phi(n + 1);
  for (int b = 0; b < 2; ++b) {
    const double a = eig.values[b];
    const complex_t weight = braket(s.post(), eig.vectors[b]) * braket(eig.vectors[b], s.pre());
    if (weight == complex_t{}) continue;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double x = grid.points[j];
      hg_wavefunctions(sigma, x - a * g.d, phi);
      const complex_t phase = std::polar(1.0, -a * g.k * (x - 0.5 * a * g.d));
      out.amplitudes[j] += weight * phase * phi[n];
    }
  }
  out.success_probability = inner_product(out.amplitudes, out.amplitudes, grid).real();
  if (!(out.success_probability > 0.0)) throw DomainError("post-selected pointer has zero norm");
  const double nrm = std::sqrt(out.success_probability);
  out.normalized.resize(grid.size());
  std::transform(out.amplitudes.begin(), out.amplitudes.end(), out.normalized.begin(),
                 [nrm](complex_t c) { return c / nrm; });
  return out;
}

double position_mean(const HGState& s) {
  const HGState xs = ladder_apply(LadderOp::position, s);
  const double n2 = s.norm() * s.norm();
  return inner_product(s, xs).real() / n2;
}

double position_variance(const HGState& s) {
  const HGState xs = ladder_apply(LadderOp::position, s);
  const double n2 = s.norm() * s.norm();
  const double mean = inner_product(s, xs).real() / n2;
  return xs.norm() * xs.norm() / n2 - mean * mean;
}

double position_mean(std::span<const complex_t> amplitudes, const Grid& g) {
  double m0 = 0.0, m1 = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double p = g.weights[j] * std::norm(amplitudes[j]);
    m0 += p;
    m1 += p * g.points[j];
  }
  return m1 / m0;
}

double position_variance(std::span<const complex_t> amplitudes, const Grid& g) {
  const double mean = position_mean(amplitudes, g);
  double m0 = 0.0, m2 = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double p = g.weights[j] * std::norm(amplitudes[j]);
    const double dx = g.points[j] - mean;
    m0 += p;
    m2 += p * dx * dx;
  }
  return m2 / m0;
}

}  // namespace hgwm
