#include "hgwm/hermite_gauss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hgwm/errors.hpp"

namespace hgwm {

namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw DomainError("sigma must be positive and finite, got " + std::to_string(sigma));
}

void check_order(int n) {
  if (n < 0 || n > kMaxOrder)
    throw DomainError("H-G order " + std::to_string(n) + " outside [0, " +
                      std::to_string(kMaxOrder) + "]");
}

}  // namespace

double HGState::norm() const {
  double s = 0.0;
  for (const auto& c : coeffs) s += std::norm(c);
  return std::sqrt(s);
}

HGState& HGState::normalize() {
  const double nrm = norm();
  if (!(nrm > 0.0)) throw DomainError("cannot normalize a zero state");
  for (auto& c : coeffs) c /= nrm;
  return *this;
}

HGState HGState::mode(int n, double sigma) {
  check_order(n);
  check_sigma(sigma);
  HGState s;
  s.sigma = sigma;
  s.coeffs.assign(n + 1, complex_t{});
  s.coeffs[n] = 1.0;
  return s;
}

double hermite_poly(int n, double y) {
  if (n < 0) throw DomainError("Hermite order must be non-negative");
  if (n == 0) return 1.0;
  double hm1 = 1.0;
  double h = 2.0 * y;
  for (int m = 1; m < n; ++m) {
    const double hp1 = 2.0 * y * h - 2.0 * m * hm1;
    hm1 = h;
    h = hp1;
  }
  return h;
}

void hg_wavefunctions(double sigma, double x, std::span<double> out) {
  check_sigma(sigma);
  if (out.empty()) return;
  if (out.size() > static_cast<std::size_t>(kMaxOrder) + 1)
    throw DomainError("requested more H-G orders than supported");
  // phi_{m+1} = sqrt(2/(m+1)) xi phi_m - sqrt(m/(m+1)) phi_{m-1}, xi = x / (sqrt2 sigma)
  const double xi = x / (std::numbers::sqrt2 * sigma);
  const double phi0 =
      std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25) * std::exp(-x * x / (4.0 * sigma * sigma));
  out[0] = phi0;
  if (out.size() == 1) return;
  out[1] = std::numbers::sqrt2 * xi * phi0;
  for (std::size_t m = 1; m + 1 < out.size(); ++m) {
    const double md = static_cast<double>(m);
    out[m + 1] = std::sqrt(2.0 / (md + 1.0)) * xi * out[m] - std::sqrt(md / (md + 1.0)) * out[m - 1];
  }
}

double hg_wavefunction(int n, double sigma, double x) {
  check_order(n);
  std::array<double, kMaxOrder + 1> buf{};
  hg_wavefunctions(sigma, x, std::span<double>(buf.data(), n + 1));
  return buf[n];
}

double hg_wavefunction_derivative(int n, double sigma, double x) {
  check_order(n);
  if (n + 1 > kMaxOrder) throw DomainError("derivative needs order n+1 within the supported range");
  std::array<double, kMaxOrder + 2> buf{};
  hg_wavefunctions(sigma, x, std::span<double>(buf.data(), n + 2));
  const double lower = n > 0 ? std::sqrt(static_cast<double>(n)) * buf[n - 1] : 0.0;
  return (lower - std::sqrt(n + 1.0) * buf[n + 1]) / (2.0 * sigma);
}

Grid make_grid(int n_max, double sigma, std::size_t size) {
  check_order(n_max);
  check_sigma(sigma);
  if (size < 256) throw DomainError("grid size must be at least 256, got " + std::to_string(size));

  Grid g;
  g.sigma = sigma;
  g.n_max = n_max;
  const double half_width = std::max(10.0, 5.0 * std::sqrt(2.0 * n_max + 1.0));
  g.extent = half_width * sigma;
  g.points.resize(size);
  g.weights.assign(size, 0.0);
  const double h = 2.0 * g.extent / static_cast<double>(size - 1);
  for (std::size_t j = 0; j < size; ++j) {
    g.points[j] = -g.extent + h * static_cast<double>(j);
    g.weights[j] = h;
  }
  g.points.back() = g.extent;
  g.weights.front() *= 0.5;
  g.weights.back() *= 0.5;

  std::vector<double> norms(n_max + 1, 0.0);
  std::vector<double> phi(n_max + 1);
  for (std::size_t j = 0; j < size; ++j) {
    hg_wavefunctions(sigma, g.points[j], phi);
    for (int m = 0; m <= n_max; ++m) norms[m] += g.weights[j] * phi[m] * phi[m];
  }
  for (int m = 0; m <= n_max; ++m) {
    if (std::abs(norms[m] - 1.0) > 1e-10)
      throw DomainError("grid of " + std::to_string(size) + " points cannot resolve phi_" +
                        std::to_string(m) + " (norm " + std::to_string(norms[m]) + ")");
  }
  return g;
}

Grid default_grid(double sigma) { return make_grid(12, sigma, 4096); }

complex_t inner_product(std::span<const complex_t> a, std::span<const complex_t> b, const Grid& g) {
  if (a.size() != g.size() || b.size() != g.size())
    throw DomainError("amplitude length does not match grid size");
  complex_t acc{};
  for (std::size_t j = 0; j < a.size(); ++j) acc += g.weights[j] * std::conj(a[j]) * b[j];
  return acc;
}

complex_t inner_product(const HGState& a, const HGState& b) {
  if (std::abs(a.sigma - b.sigma) > 1e-12 * std::max(a.sigma, b.sigma))
    throw DomainError("inner product of H-G states with different sigma");
  complex_t acc{};
  const std::size_t m = std::min(a.coeffs.size(), b.coeffs.size());
  for (std::size_t j = 0; j < m; ++j) acc += std::conj(a.coeffs[j]) * b.coeffs[j];
  return acc;
}

HGState ladder_apply(LadderOp op, const HGState& s) {
  if (s.m_max() + 1 > kMaxOrder) throw DomainError("ladder result exceeds supported order");
  HGState r;
  r.sigma = s.sigma;
  r.coeffs.assign(s.coeffs.size() + 1, complex_t{});
  const double up_sign = op == LadderOp::position ? 1.0 : -1.0;
  const double scale = op == LadderOp::position ? s.sigma : 1.0 / (2.0 * s.sigma);
  for (int m = 0; m <= s.m_max(); ++m) {
    const complex_t c = s.coeffs[m];
    if (m > 0) r.coeffs[m - 1] += scale * std::sqrt(static_cast<double>(m)) * c;
    r.coeffs[m + 1] += up_sign * scale * std::sqrt(m + 1.0) * c;
  }
  return r;
}

cvector to_grid(const HGState& s, const Grid& g) {
  cvector out(g.size());
  std::vector<double> phi(s.coeffs.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    hg_wavefunctions(s.sigma, g.points[j], phi);
    complex_t acc{};
    for (std::size_t m = 0; m < phi.size(); ++m) acc += s.coeffs[m] * phi[m];
    out[j] = acc;
  }
  return out;
}

std::vector<double> mode_on_grid(int n, const Grid& g) {
  check_order(n);
  std::vector<double> out(g.size());
  std::vector<double> phi(n + 1);
  for (std::size_t j = 0; j < g.size(); ++j) {
    hg_wavefunctions(g.sigma, g.points[j], phi);
    out[j] = phi[n];
  }
  return out;
}

HGState project(std::span<const complex_t> amplitudes, const Grid& g, int m_max) {
  check_order(m_max);
  if (amplitudes.size() != g.size()) throw DomainError("amplitude length does not match grid size");
  HGState s;
  s.sigma = g.sigma;
  s.coeffs.assign(m_max + 1, complex_t{});
  std::vector<double> phi(m_max + 1);
  for (std::size_t j = 0; j < g.size(); ++j) {
    hg_wavefunctions(g.sigma, g.points[j], phi);
    const complex_t wa = g.weights[j] * amplitudes[j];
    for (int m = 0; m <= m_max; ++m) s.coeffs[m] += phi[m] * wa;
  }
  return s;
}

}  // namespace hgwm
