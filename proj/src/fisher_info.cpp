#include "hgwm/fisher_info.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hgwm/errors.hpp"

namespace hgwm {

namespace {

void check_common(int n, double sigma, double success_probability) {
  if (n < 0 || n > kMaxOrder) throw DomainError("H-G order out of range");
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  if (!(success_probability > 0.0 && success_probability <= 1.0))
    throw DomainError("success probability must lie in (0, 1]");
}

complex_t dot(const cvector& a, const cvector& b, const std::vector<double>& w) {
  complex_t acc{};
  if (w.empty()) {
    for (std::size_t j = 0; j < a.size(); ++j) acc += std::conj(a[j]) * b[j];
  } else {
    for (std::size_t j = 0; j < a.size(); ++j) acc += w[j] * std::conj(a[j]) * b[j];
  }
  return acc;
}

struct Derivatives {
  cvector phi;
  std::array<cvector, 2> dphi;
};

Derivatives central_differences(const StateMap& map, const ParamVector& g0, double step) {
  Derivatives out;
  out.phi = map.state(g0);
  const double nrm = std::sqrt(dot(out.phi, out.phi, map.weights).real());
  if (std::abs(nrm - 1.0) > 1e-8) throw DomainError("state map returned a non-normalized state");
  const std::array<double, 2> h{step * map.length_scale, step / map.length_scale};
  for (int i = 0; i < 2; ++i) {
    ParamVector plus = g0, minus = g0;
    (i == 0 ? plus.d : plus.k) += h[i];
    (i == 0 ? minus.d : minus.k) -= h[i];
    const cvector up = map.state(plus);
    const cvector dn = map.state(minus);
    if (up.size() != out.phi.size() || dn.size() != out.phi.size())
      throw DomainError("state map changed dimension between evaluations");
    out.dphi[i].resize(up.size());
    for (std::size_t j = 0; j < up.size(); ++j) out.dphi[i][j] = (up[j] - dn[j]) / (2.0 * h[i]);
  }
  return out;
}

Mat2 pure_state_qfim(const Derivatives& der, const std::vector<double>& w) {
  Mat2 q;
  std::array<complex_t, 2> proj{};
  for (int i = 0; i < 2; ++i) proj[i] = dot(der.dphi[i], der.phi, w);  // <d_i phi|phi>
  for (int i = 0; i < 2; ++i) {
    for (int j = i; j < 2; ++j) {
      const complex_t overlap = dot(der.dphi[i], der.dphi[j], w);
      const double v = 4.0 * overlap.real() - 4.0 * (proj[i] * std::conj(proj[j])).real();
      q(i, j) = v;
      q(j, i) = v;
    }
  }
  return q;
}

}  // namespace

FisherMatrix qfim_analytic(int n, double sigma, complex_t aw, double success_probability, double source_count) {
  check_common(n, sigma, success_probability);
  const double base = (2.0 * n + 1.0) * std::norm(aw);
  return FisherMatrix{Mat2::diag(base / (sigma * sigma), 4.0 * base * sigma * sigma),
                      success_probability * source_count, FisherKind::quantum};
}

FisherMatrix cfim_mle_analytic(int n, double sigma, complex_t aw, double success_probability, double source_count) {
  check_common(n, sigma, success_probability);
  const double re = aw.real(), im = aw.imag();
  const double order = 2.0 * n + 1.0;
  return FisherMatrix{Mat2::symmetric(order * re * re / (sigma * sigma), 2.0 * re * im, 4.0 * order * im * im * sigma * sigma),
                      success_probability * source_count, FisherKind::classical_mle};
}

StateMap first_order_state_map(int n, double sigma, complex_t aw) {
  StateMap map;
  map.length_scale = sigma;
  map.state = [n, sigma, aw](const ParamVector& g) {
    return final_state_first_order(n, sigma, aw, g).coeffs;
  };
  return map;
}

StateMap exact_state_map(const Selection& sel, int n, double sigma, const Grid& grid) {
  StateMap map;
  map.length_scale = sigma;
  map.weights = grid.weights;
  map.state = [sel, n, sigma, grid](const ParamVector& g) {
    return final_state_exact(sel, n, sigma, g, grid).normalized;
  };
  return map;
}

NumericFisher qfim_numeric(const StateMap& map, const ParamVector& g0, double step) {
  if (!(step > 0.0)) throw DomainError("finite-difference step must be positive");
  const Mat2 fine = pure_state_qfim(central_differences(map, g0, step), map.weights);
  const Mat2 coarse = pure_state_qfim(central_differences(map, g0, 10.0 * step), map.weights);

  NumericFisher out;
  out.fisher = FisherMatrix{fine, 1.0, FisherKind::quantum};
  const double s0 = std::sqrt(std::abs(fine(0, 0))), s1 = std::sqrt(std::abs(fine(1, 1)));
  const std::array<double, 2> scale{s0, s1};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double ref = scale[i] * scale[j];
      if (ref > 0.0)
        out.step_discrepancy = std::max(out.step_discrepancy, std::abs(fine(i, j) - coarse(i, j)) / ref);
    }
  }
  out.step_warning = out.step_discrepancy > 0.01;
  return out;
}

CovarianceBound qcrb(const FisherMatrix& f) {
  const Mat2 t = f.total();
  const double det = t.det();
  const double scale = std::abs(t(0, 0) * t(1, 1));
  CovarianceBound out;
  if (scale == 0.0 || det <= 1e-12 * scale) {
    const SymEigen2 e = eigen_symmetric(t);
    out.bounded = false;
    out.null_direction = e.vectors[0];
    const double inf = std::numeric_limits<double>::infinity();
    out.m = Mat2::symmetric(inf, inf, inf);
    return out;
  }
  out.m = Mat2::symmetric(t(1, 1) / det, -t(0, 1) / det, t(0, 0) / det);
  return out;
}

FisherMatrix cfim_mle_numeric(int n, double sigma, complex_t aw, const ParamVector& g0, const Grid& grid) {
  check_common(n, sigma, 1.0);
  const double re = aw.real(), im = aw.imag();
  Mat2 f;
  double negative_mass = 0.0;
  double neg_lo = std::numeric_limits<double>::infinity();
  double neg_hi = -neg_lo;
  std::vector<double> phi(n + 2);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.points[j];
    hg_wavefunctions(sigma, x, phi);
    const double p0 = phi[n];
    const double dp0 = ((n > 0 ? std::sqrt(static_cast<double>(n)) * phi[n - 1] : 0.0) -
                        std::sqrt(n + 1.0) * phi[n + 1]) / (2.0 * sigma);
    const double dP_dd = -2.0 * re * dp0 * p0;
    const double dP_dk = 2.0 * im * x * p0 * p0;
    const double density = p0 * p0 + dP_dd * g0.d + dP_dk * g0.k;
    if (density < 0.0) {
      negative_mass += grid.weights[j] * -density;
      neg_lo = std::min(neg_lo, x);
      neg_hi = std::max(neg_hi, x);
      continue;
    }
    if (density < 1e-300) continue;
    const double w = grid.weights[j] / density;
    f(0, 0) += w * dP_dd * dP_dd;
    f(0, 1) += w * dP_dd * dP_dk;
    f(1, 1) += w * dP_dk * dP_dk;
  }
  if (negative_mass > 1e-6) {
    std::ostringstream msg;
    msg << "first-order density is negative on x in [" << neg_lo << ", " << neg_hi << "] (mass " << negative_mass
        << ")";
    throw DomainError(msg.str());
  }
  f(1, 0) = f(0, 1);
  return FisherMatrix{f, 1.0, FisherKind::classical_mle};
}

namespace {

void check_lo(const LocalOscillator& lo, int n) {
  lo.validate();
  if (lo.n_ref != n) throw DomainError("local oscillator built for a different pointer order");
}

}  // namespace

FisherMatrix cfim_homodyne(int n, double sigma, complex_t aw, const LocalOscillator& lo1, const LocalOscillator& lo2,
                           double source_count, double lo_photons, double success_probability, const ParamVector& g0) {
  check_common(n, sigma, success_probability);
  check_lo(lo1, n);
  check_lo(lo2, n);
  const double signal = success_probability * source_count;
  if (!(signal > 0.0)) throw DomainError("signal photon number must be positive");
  if (lo_photons < 100.0 * signal) throw DomainError("homodyne CFIM needs N_LO >= 100 N'");

  HomodyneConfig cfg;
  cfg.amp_signal = std::sqrt(signal);
  cfg.amp_lo = std::sqrt(lo_photons);
  cfg.sigma = sigma;
  cfg.n = n;

  // normalized first-order state and its parameter derivatives
  const HGState c = first_order_unnormalized(n, sigma, aw, g0);
  const double cn = c.norm();
  const HGState phi = c.normalized();
  std::array<HGState, 2> dc;
  for (auto& s : dc) {
    s.sigma = sigma;
    s.coeffs.assign(n + 2, complex_t{});
  }
  if (n > 0) {
    dc[0].coeffs[n - 1] = -std::sqrt(static_cast<double>(n)) * aw / (2.0 * sigma);
    dc[1].coeffs[n - 1] = -kI * std::sqrt(static_cast<double>(n)) * aw * sigma;
  }
  dc[0].coeffs[n + 1] = std::sqrt(n + 1.0) * aw / (2.0 * sigma);
  dc[1].coeffs[n + 1] = -kI * std::sqrt(n + 1.0) * aw * sigma;
  std::array<HGState, 2> dphi;
  for (int i = 0; i < 2; ++i) {
    const double radial = inner_product(c, dc[i]).real() / (cn * cn * cn);
    dphi[i] = dc[i];
    for (int m = 0; m <= n + 1; ++m) dphi[i].coeffs[m] = dc[i].coeffs[m] / cn - c.coeffs[m] * radial;
  }

  const double amp = 0.5 * cfg.amp_signal * cfg.amp_lo;  // A_f1 A_LO1
  Mat2 total;
  for (const LocalOscillator* lo : {&lo1, &lo2}) {
    const PortIntensities ports = port_intensities(phi, *lo, cfg);
    const std::array<double, 2> grad{amp * lo_overlap(*lo, dphi[0]).real(), amp * lo_overlap(*lo, dphi[1]).real()};
    for (double sign : {1.0, -1.0}) {
      const double intensity = sign > 0 ? ports.plus : ports.minus;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) total(i, j) += grad[i] * grad[j] / intensity;
    }
  }
  return FisherMatrix{total * (1.0 / signal), signal, FisherKind::classical_homodyne};
}

FisherMatrix cfim_homodyne_asymptotic(int n, double sigma, complex_t aw, const LocalOscillator& lo1,
                                      const LocalOscillator& lo2, double signal_photons) {
  check_common(n, sigma, 1.0);
  check_lo(lo1, n);
  check_lo(lo2, n);
  const complex_t awc = std::conj(aw);
  const double nn = static_cast<double>(n);
  double bracket = 0.0;
  for (const LocalOscillator* lo : {&lo1, &lo2}) {
    bracket += nn * std::norm(awc * lo->alpha) + (nn + 1.0) * std::norm(awc * lo->beta) -
               2.0 * std::sqrt(nn * (nn + 1.0)) * (awc * awc * lo->alpha * lo->beta).real();
  }
  return FisherMatrix{Mat2::diag(bracket / (4.0 * sigma * sigma), bracket * sigma * sigma), signal_photons,
                      FisherKind::classical_homodyne};
}

double tradeoff_trace(const FisherMatrix& f, const FisherMatrix& q) {
  const CovarianceBound inv = qcrb(q);
  if (!inv.bounded) throw DomainError("tradeoff trace needs an invertible QFIM");
  return (f.total() * inv.m).trace();
}

LoCheck optimal_lo_check(const LocalOscillator& lo, complex_t aw, int n) {
  LoCheck out;
  const double a = std::abs(lo.alpha), b = std::abs(lo.beta);
  if (n == 0 && b == 0.0) {
    out.explanation = "degenerate: n = 0 needs weight on phi_1, but beta = 0";
    out.phase_residual = 1.0;
    out.ratio_residual = 1.0;
    return out;
  }
  const double target = -std::abs(aw * std::conj(lo.alpha)) * std::abs(aw * std::conj(lo.beta));
  const double value = (aw * aw * std::conj(lo.alpha) * std::conj(lo.beta)).real();
  const double phase_scale = std::norm(aw) * a * b;
  out.phase_residual = phase_scale > 0.0 ? std::abs(value - target) / phase_scale : std::abs(value - target);
  out.ratio_residual = std::abs(a * std::sqrt(n + 1.0) - b * std::sqrt(static_cast<double>(n))) /
                       std::sqrt(2.0 * n + 1.0);
  const bool phase_ok = out.phase_residual <= 1e-9;
  const bool ratio_ok = out.ratio_residual <= 1e-9;
  out.optimal = phase_ok && ratio_ok;
  if (!phase_ok && !ratio_ok) {
    out.explanation = "phase and amplitude-ratio conditions both fail";
  } else if (!phase_ok) {
    out.explanation = "phase condition Re(A_w^2 a* b*) = -|A_w a||A_w b| fails";
  } else if (!ratio_ok) {
    out.explanation = "amplitude ratio |a|/|b| != sqrt(n)/sqrt(n+1)";
  } else {
    out.explanation = "saturates the homodyne tradeoff";
  }
  return out;
}

complex_t sld_commutator_expectation(const StateMap& map, const ParamVector& g0, double step) {
  const Derivatives der = central_differences(map, g0, step);
  const auto& w = map.weights;
  // <phi|L_i L_j|phi> = 4 (a_i a_j + a_i a_j* + <d_i phi|d_j phi> + a_j* a_i*), a_i = <phi|d_i phi>
  const complex_t ad = dot(der.phi, der.dphi[0], w);
  const complex_t ak = dot(der.phi, der.dphi[1], w);
  const complex_t dk = dot(der.dphi[0], der.dphi[1], w);
  const complex_t kd = dot(der.dphi[1], der.dphi[0], w);
  const complex_t ldlk = 4.0 * (ad * ak + ad * std::conj(ak) + dk + std::conj(ak) * std::conj(ad));
  const complex_t lkld = 4.0 * (ak * ad + ak * std::conj(ad) + kd + std::conj(ad) * std::conj(ak));
  return ldlk - lkld;
}

}  // namespace hgwm
