#pragma once

#include <cstdint>
#include <utility>

#include "hgwm/hermite_gauss.hpp"
#include "hgwm/types.hpp"
#include "hgwm/weak_process.hpp"

namespace hgwm {

/// LO = alpha phi_{n-1} + beta phi_{n+1}, |alpha|^2 + |beta|^2 = 1.
struct LocalOscillator {
  complex_t alpha;
  complex_t beta;
  int n_ref = 1;

  void validate() const;
};

/// Dual homodyne setup. Signal and LO photons are split evenly between the
/// two detectors: A_f1 = A_f2 = A_f / sqrt2 and likewise for the LO.
struct HomodyneConfig {
  double amp_signal = 0.0;  // A_f = sqrt(N')
  double amp_lo = 0.0;      // A_LO = sqrt(N_LO)
  double epsilon = 0.01;
  double lambda0 = 633e-9;
  double sigma = 1.0;
  int n = 1;
  Observable observable = Observable::pauli_z_plus_identity;

  double signal_photons() const { return amp_signal * amp_signal; }
  double lo_photons() const { return amp_lo * amp_lo; }

  /// Checks amplitudes, epsilon range and, when `asymptotic` is set, N_LO >= 100 N'.
  void validate(bool asymptotic = true) const;

  static HomodyneConfig from_counts(double signal_photons, double lo_photons, double epsilon, int n,
                                    double sigma = 1.0, double lambda0 = 633e-9);
};

/// alpha phi_{n-1} + beta phi_{n+1} as a normalized basis state. Throws for
/// n_ref = 0 with alpha != 0, since phi_{-1} does not exist.
HGState lo_state(const LocalOscillator& lo, double sigma);

/// <LO|state> = conj(alpha) c_{n-1} + conj(beta) c_{n+1}. For n_ref = 0 the
/// alpha part sits in a mode orthogonal to every pointer mode and contributes
/// LO power but no interference.
complex_t lo_overlap(const LocalOscillator& lo, const HGState& state);

/// Both outputs of a 50:50 splitter fed with phi_{n-1} and phi_{n+1}:
/// (phi_{n-1} + i phi_{n+1})/sqrt2 and (i phi_{n-1} + phi_{n+1})/sqrt2.
std::pair<LocalOscillator, LocalOscillator> beam_splitter_lo_pair(int n);

/// Splitter LO coefficients without the n >= 1 check; at n = 0 the phi_{-1}
/// input is an empty port.
std::pair<LocalOscillator, LocalOscillator> splitter_lo_coefficients(int n);

/// LO pair that saturates the homodyne tradeoff for Re A_w = -Im A_w:
/// (sqrt n, i sqrt(n+1))/sqrt(2n+1) and (i sqrt n, sqrt(n+1))/sqrt(2n+1).
std::pair<LocalOscillator, LocalOscillator> optimal_lo_pair(int n);

struct PortIntensities {
  double plus = 0.0;
  double minus = 0.0;
  double difference() const { return plus - minus; }
  double sum() const { return plus + minus; }
};

/// I^{+-} = || (A_f1 phi_f +- A_LO1 phi_LO) / sqrt2 ||^2 for one detector.
PortIntensities port_intensities(const HGState& final_state, const LocalOscillator& lo,
                                 const HomodyneConfig& cfg);

/// Linearized difference intensities for the beam-splitter LO pair,
/// dI_1 = A_f A_LO (sqrt n + sqrt(n+1)) (d/2sigma + sigma k) / (sqrt2 eps),
/// dI_2 = same with (-d/2sigma + sigma k).
/// Requires the weak value of cfg to lie within 5% of (-1 + i)/eps.
std::pair<double, double> difference_signals(const ParamVector& g, const HomodyneConfig& cfg);

/// Difference intensities from the exact post-selected pointer, fed through
/// the port intensities of both beam-splitter LOs.
std::pair<double, double> exact_difference_signals(const ParamVector& g, const HomodyneConfig& cfg,
                                                   const Grid& grid);

/// Mean photon counts at the four ports (detector 1 +-, detector 2 +-) from the exact pipeline.
std::array<double, 4> exact_port_counts(const ParamVector& g, const HomodyneConfig& cfg, const Grid& grid);

struct DkEstimate {
  double d = 0.0;
  double k = 0.0;
  double mirror_displacement = 0.0;  // d / 2
  double mirror_tilt = 0.0;          // lambda0 k / 8 pi
};

DkEstimate estimate_dk(double delta_i1, double delta_i2, const HomodyneConfig& cfg);

enum class NoiseModel { gaussian, poisson, none };

struct ShotNoiseStats {
  double mean_d = 0.0;
  double mean_k = 0.0;
  double std_d = 0.0;
  double std_k = 0.0;
  double std_delta = 0.0;
  double std_theta = 0.0;
  std::size_t trials = 0;
};

/// Monte Carlo of the dual homodyne estimator under shot noise. Each port count
/// is drawn independently per trial with variance equal to its mean.
ShotNoiseStats shot_noise_mc(const ParamVector& g_true, const HomodyneConfig& cfg, std::size_t trials,
                             std::uint64_t seed, NoiseModel noise = NoiseModel::gaussian);

struct MinDetectable {
  double delta_min = 0.0;
  double theta_min = 0.0;
  double delta_asymptotic = 0.0;
  double theta_asymptotic = 0.0;
};

/// Shot-noise limited mirror displacement and tilt for N source photons.
MinDetectable min_detectable(const HomodyneConfig& cfg, double source_photons);

/// |A_w - (-1 + i)/eps| / |A_w| for the configured selection.
double weak_value_regime_error(const HomodyneConfig& cfg);

}  // namespace hgwm
