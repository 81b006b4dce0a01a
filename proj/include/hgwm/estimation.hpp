#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "hgwm/fisher_info.hpp"
#include "hgwm/hermite_gauss.hpp"
#include "hgwm/types.hpp"

namespace hgwm {

/// First-order pointer model the samples were drawn from.
struct PointerModel {
  int n = 1;
  double sigma = 1.0;
  complex_t weak_value;
};

struct SampleBatch {
  std::vector<double> positions;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  PointerModel model;
  ParamVector generated_at;
};

/// Inverse-CDF sampler for |<x|phi_f>|^2 of the normalized first-order state.
/// The CDF is tabulated on a grid and inverted with linear interpolation
/// between nodes.
class PointerSampler {
 public:
  PointerSampler(const PointerModel& model, const ParamVector& g, std::size_t grid_size = 4096);

  double draw(std::mt19937_64& rng) const;
  SampleBatch sample(std::size_t count, std::uint64_t seed, std::uint64_t stream = 0) const;

  const Grid& grid() const { return grid_; }
  /// Tabulated CDF at the grid nodes.
  const std::vector<double>& cdf() const { return cdf_; }

 private:
  PointerModel model_;
  ParamVector g_;
  Grid grid_;
  std::vector<double> cdf_;
};

SampleBatch sample_positions(int n, double sigma, complex_t weak_value, const ParamVector& g, std::size_t count,
                             std::uint64_t seed);

/// Normalized first-order density at x.
double pointer_density(const PointerModel& model, const ParamVector& g, double x);

/// sum_i log P_f(x_i | g). Returns -inf if any sample sits at zero density.
double log_likelihood(const SampleBatch& batch, const ParamVector& g);

struct MleResult {
  ParamVector estimate;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool boundary_pinned = false;
  /// The model's CFIM is singular, so one direction of (d, k) is not identified.
  bool degenerate = false;
};

struct MleOptions {
  double box = 0.05;                // |d|/sigma and |k| sigma bound
  double initial_scale = 1e-3;      // simplex size in scaled units
  double tolerance = 1e-9;          // simplex diameter, scaled units
  int max_iterations = 2000;
};

/// Maximizes the log-likelihood with Nelder-Mead in scaled coordinates
/// (d/sigma, k sigma), starting from (0, 0). Throws NumericalError if the
/// simplex has not collapsed after max_iterations.
MleResult mle_fit(const SampleBatch& batch, const MleOptions& options = {});

struct ErrorEllipse {
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double angle = 0.0;  // radians, major axis measured from the d axis
  double confidence = 0.0;
};

/// Ellipse of a 2-D Gaussian with covariance `cov` at the given coverage.
ErrorEllipse error_ellipse(const Mat2& cov, double confidence);

/// 1-sigma coverage of a 2-D Gaussian, 1 - exp(-1/2).
inline constexpr double kOneSigma2d = 0.39346934028736658;

struct EnsembleConfig {
  int n = 1;
  double sigma = 1.0;
  complex_t weak_value;
  double success_probability = 1.0;
  ParamVector g_true;
  std::size_t samples = 500;  // N'
  std::size_t trials = 2000;
  std::uint64_t seed = 0;
  double confidence = kOneSigma2d;
  MleOptions mle;
};

struct EnsembleResult {
  std::vector<ParamVector> estimates;
  std::vector<std::uint8_t> pinned;
  std::vector<std::uint8_t> failed;  // fit did not converge; estimate is NaN
  Mat2 sample_cov;                   // of (d_hat - d, k_hat - k) over converged trials
  ParamVector mean_error;
  CovarianceBound theory_cov;
  ErrorEllipse ellipse;         // from theory_cov
  ErrorEllipse sample_ellipse;  // from sample_cov
  std::size_t pinned_count = 0;
  std::size_t failed_count = 0;
  bool degenerate = false;
};

/// Repeated sample -> fit cycles. Trial t draws from trial_stream(seed, t);
/// results are reduced in trial order.
EnsembleResult run_ensemble(const EnsembleConfig& cfg);

/// Sample covariance (n - 1 normalization). Rows with NaN entries are skipped.
Mat2 sample_covariance(const std::vector<ParamVector>& rows);

}  // namespace hgwm
