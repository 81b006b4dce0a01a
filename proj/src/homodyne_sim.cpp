#include "hgwm/homodyne_sim.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "hgwm/errors.hpp"
#include "hgwm/parallel.hpp"

namespace hgwm {

void LocalOscillator::validate() const {
  if (n_ref < 0 || n_ref + 1 > kMaxOrder) throw DomainError("local oscillator order out of range");
  const double norm2 = std::norm(alpha) + std::norm(beta);
  if (std::abs(norm2 - 1.0) > 1e-12)
    throw DomainError("local oscillator not normalized: |alpha|^2 + |beta|^2 = " + std::to_string(norm2));
}

void HomodyneConfig::validate(bool asymptotic) const {
  if (!(amp_signal > 0.0) || !(amp_lo > 0.0)) throw DomainError("signal and LO amplitudes must be positive");
  if (!(epsilon > 0.0 && epsilon <= 0.2)) throw DomainError("epsilon must lie in (0, 0.2]");
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  if (n < 0 || n + 1 > kMaxOrder) throw DomainError("pointer order out of range");
  if (!(lambda0 > 0.0)) throw DomainError("wavelength must be positive");
  if (asymptotic && lo_photons() < 100.0 * signal_photons())
    throw DomainError("N_LO must be at least 100 N' for the homodyne formulas");
}

HomodyneConfig HomodyneConfig::from_counts(double signal_photons, double lo_photons, double epsilon, int n,
                                           double sigma, double lambda0) {
  HomodyneConfig cfg;
  cfg.amp_signal = std::sqrt(signal_photons);
  cfg.amp_lo = std::sqrt(lo_photons);
  cfg.epsilon = epsilon;
  cfg.n = n;
  cfg.sigma = sigma;
  cfg.lambda0 = lambda0;
  return cfg;
}

HGState lo_state(const LocalOscillator& lo, double sigma) {
  lo.validate();
  if (lo.n_ref == 0 && lo.alpha != complex_t{}) throw DomainError("n = 0 has no phi_{-1} mode for alpha");
  HGState s;
  s.sigma = sigma;
  s.coeffs.assign(lo.n_ref + 2, complex_t{});
  if (lo.n_ref > 0) s.coeffs[lo.n_ref - 1] = lo.alpha;
  s.coeffs[lo.n_ref + 1] = lo.beta;
  return s.normalize();
}

complex_t lo_overlap(const LocalOscillator& lo, const HGState& state) {
  return std::conj(lo.alpha) * state.coeff(lo.n_ref - 1) + std::conj(lo.beta) * state.coeff(lo.n_ref + 1);
}

std::pair<LocalOscillator, LocalOscillator> splitter_lo_coefficients(int n) {
  const double r = 1.0 / std::numbers::sqrt2;
  return {LocalOscillator{r, kI * r, n}, LocalOscillator{kI * r, r, n}};
}

std::pair<LocalOscillator, LocalOscillator> beam_splitter_lo_pair(int n) {
  if (n < 1) throw DomainError("beam-splitter LO pair needs n >= 1");
  return splitter_lo_coefficients(n);
}

std::pair<LocalOscillator, LocalOscillator> optimal_lo_pair(int n) {
  if (n < 1) throw DomainError("optimal LO pair needs n >= 1");
  const double norm = std::sqrt(2.0 * n + 1.0);
  const double a = std::sqrt(static_cast<double>(n)) / norm;
  const double b = std::sqrt(n + 1.0) / norm;
  return {LocalOscillator{a, kI * b, n}, LocalOscillator{kI * a, b, n}};
}

PortIntensities port_intensities(const HGState& final_state, const LocalOscillator& lo, const HomodyneConfig& cfg) {
  lo.validate();
  const double af = cfg.amp_signal / std::numbers::sqrt2;
  const double alo = cfg.amp_lo / std::numbers::sqrt2;
  const double signal_norm2 = final_state.norm() * final_state.norm();
  const double background = 0.5 * (af * af * signal_norm2 + alo * alo);
  const double cross = af * alo * lo_overlap(lo, final_state).real();
  return PortIntensities{background + cross, background - cross};
}

double weak_value_regime_error(const HomodyneConfig& cfg) {
  const complex_t aw = weak_value(polarization_selection(cfg.epsilon, cfg.observable));
  const complex_t target = complex_t(-1.0, 1.0) / cfg.epsilon;
  return std::abs(aw - target) / std::abs(aw);
}

namespace {

void check_regime(const HomodyneConfig& cfg) {
  const double err = weak_value_regime_error(cfg);
  if (err >= 0.05)
    throw DomainError("weak value deviates " + std::to_string(100.0 * err) +
                      "% from (-1+i)/eps; linearized homodyne formulas do not apply");
}

double order_factor(int n) { return std::sqrt(static_cast<double>(n)) + std::sqrt(n + 1.0); }

}  // namespace

std::pair<double, double> difference_signals(const ParamVector& g, const HomodyneConfig& cfg) {
  cfg.validate(false);
  check_regime(cfg);
  const double pre = cfg.amp_signal * cfg.amp_lo * order_factor(cfg.n) / (std::numbers::sqrt2 * cfg.epsilon);
  const double disp = g.d / (2.0 * cfg.sigma);
  const double kick = cfg.sigma * g.k;
  return {pre * (disp + kick), pre * (-disp + kick)};
}

std::array<double, 4> exact_port_counts(const ParamVector& g, const HomodyneConfig& cfg, const Grid& grid) {
  cfg.validate(false);
  if (grid.n_max < cfg.n + 2) throw DomainError("grid does not resolve orders up to n + 2");
  const Selection sel = polarization_selection(cfg.epsilon, cfg.observable);
  const ExactFinalState exact = final_state_exact(sel, cfg.n, cfg.sigma, g, grid);
  HGState state = project(exact.normalized, grid, grid.n_max);
  // LO phase is locked to the unperturbed signal, i.e. to arg <f|i>
  const complex_t ref = std::conj(sel.overlap()) / std::abs(sel.overlap());
  for (complex_t& c : state.coeffs) c *= ref;
  const auto [lo1, lo2] = splitter_lo_coefficients(cfg.n);
  const PortIntensities p1 = port_intensities(state, lo1, cfg);
  const PortIntensities p2 = port_intensities(state, lo2, cfg);
  return {p1.plus, p1.minus, p2.plus, p2.minus};
}

std::pair<double, double> exact_difference_signals(const ParamVector& g, const HomodyneConfig& cfg, const Grid& grid) {
  const auto c = exact_port_counts(g, cfg, grid);
  return {c[0] - c[1], c[2] - c[3]};
}

DkEstimate estimate_dk(double delta_i1, double delta_i2, const HomodyneConfig& cfg) {
  cfg.validate(false);
  check_regime(cfg);
  const double s = order_factor(cfg.n);
  const double amp = cfg.amp_signal * cfg.amp_lo;
  DkEstimate e;
  e.d = std::numbers::sqrt2 * cfg.epsilon * cfg.sigma / s * (delta_i1 - delta_i2) / amp;
  e.k = cfg.epsilon / (std::numbers::sqrt2 * cfg.sigma) / s * (delta_i1 + delta_i2) / amp;
  e.mirror_displacement = 0.5 * e.d;
  e.mirror_tilt = cfg.lambda0 * e.k / (8.0 * std::numbers::pi);
  return e;
}

ShotNoiseStats shot_noise_mc(const ParamVector& g_true, const HomodyneConfig& cfg, std::size_t trials,
                             std::uint64_t seed, NoiseModel noise) {
  cfg.validate(true);
  check_regime(cfg);
  if (trials < 100) throw DomainError("shot-noise Monte Carlo needs at least 100 trials");
  const Grid grid = make_grid(std::max(12, cfg.n + 8), cfg.sigma, 4096);
  const std::array<double, 4> mean = exact_port_counts(g_true, cfg, grid);

  std::vector<DkEstimate> est(trials);
  parallel_for(trials, [&](std::size_t t) {
    std::mt19937_64 rng = trial_stream(seed, t);
    std::array<double, 4> counts = mean;
    for (double& c : counts) {
      switch (noise) {
        case NoiseModel::gaussian: {
          std::normal_distribution<double> gauss(0.0, 1.0);
          c += std::sqrt(c) * gauss(rng);
          break;
        }
        case NoiseModel::poisson: {
          std::poisson_distribution<long long> pois(c);
          c = static_cast<double>(pois(rng));
          break;
        }
        case NoiseModel::none:
          break;
      }
    }
    est[t] = estimate_dk(counts[0] - counts[1], counts[2] - counts[3], cfg);
  });

  ShotNoiseStats out;
  out.trials = trials;
  // moments about the first trial, so identical trials give exactly zero spread
  auto values = [](const DkEstimate& e) {
    return std::array<double, 4>{e.d, e.k, e.mirror_displacement, e.mirror_tilt};
  };
  const std::array<double, 4> ref = values(est.front());
  std::array<double, 4> sum{}, sum2{};
  for (const DkEstimate& e : est) {
    const std::array<double, 4> v = values(e);
    for (int i = 0; i < 4; ++i) sum[i] += v[i] - ref[i];
  }
  const double tn = static_cast<double>(trials);
  std::array<double, 4> shift{}, mu{};
  for (int i = 0; i < 4; ++i) {
    shift[i] = sum[i] / tn;
    mu[i] = ref[i] + shift[i];
  }
  for (const DkEstimate& e : est) {
    const std::array<double, 4> v = values(e);
    for (int i = 0; i < 4; ++i) sum2[i] += (v[i] - ref[i] - shift[i]) * (v[i] - ref[i] - shift[i]);
  }
  out.mean_d = mu[0];
  out.mean_k = mu[1];
  out.std_d = std::sqrt(sum2[0] / (tn - 1.0));
  out.std_k = std::sqrt(sum2[1] / (tn - 1.0));
  out.std_delta = std::sqrt(sum2[2] / (tn - 1.0));
  out.std_theta = std::sqrt(sum2[3] / (tn - 1.0));
  return out;
}

MinDetectable min_detectable(const HomodyneConfig& cfg, double source_photons) {
  cfg.validate(false);
  if (!(source_photons > 0.0)) throw DomainError("source photon number must be positive");
  const double s = order_factor(cfg.n);
  const double eps = cfg.epsilon;
  const double root = std::sqrt(1.0 / cfg.lo_photons() + 2.0 / (eps * eps * source_photons));
  MinDetectable m;
  m.delta_min = std::numbers::sqrt2 * eps * cfg.sigma / (2.0 * s) * root;
  m.theta_min = cfg.lambda0 * eps / (8.0 * std::numbers::sqrt2 * std::numbers::pi * cfg.sigma * s) * root;
  m.delta_asymptotic = cfg.sigma / (s * std::sqrt(source_photons));
  m.theta_asymptotic = cfg.lambda0 / (8.0 * std::numbers::pi * cfg.sigma * s * std::sqrt(source_photons));
  return m;
}

}  // namespace hgwm
