#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hgwm/hermite_gauss.hpp"
#include "hgwm/homodyne_sim.hpp"
#include "hgwm/types.hpp"
#include "hgwm/weak_process.hpp"

namespace hgwm {

enum class FisherKind { quantum, classical_mle, classical_homodyne };

/// Per-trial information matrix over (d, k) plus the effective trial count N'.
/// Units: [1/length^2] for d-d, [length^2] for k-k, dimensionless off-diagonal.
struct FisherMatrix {
  Mat2 m;
  double trials = 1.0;
  FisherKind kind = FisherKind::quantum;

  Mat2 total() const { return m * trials; }
};

/// Covariance lower bound. When the information matrix is singular the bound
/// is unbounded along `null_direction` (unit vector in (d, k)).
struct CovarianceBound {
  Mat2 m;
  bool bounded = true;
  std::array<double, 2> null_direction{};
};

/// P_s N (2n+1) |A_w|^2 diag(1/sigma^2, 4 sigma^2)
FisherMatrix qfim_analytic(int n, double sigma, complex_t weak_value, double success_probability,
                           double source_count);

/// P_s N [[(2n+1) Re^2 / sigma^2, 2 Re Im], [2 Re Im, 4 (2n+1) Im^2 sigma^2]]
FisherMatrix cfim_mle_analytic(int n, double sigma, complex_t weak_value, double success_probability,
                               double source_count);

/// Parameter-to-state map used by the finite-difference estimators. States
/// are vectors in some orthonormal frame; `weights` gives the quadrature
/// weights of that frame (empty for a discrete basis).
struct StateMap {
  std::function<cvector(const ParamVector&)> state;
  std::vector<double> weights;
  double length_scale = 1.0;  // sigma; steps are step*sigma for d and step/sigma for k
};

StateMap first_order_state_map(int n, double sigma, complex_t weak_value);
StateMap exact_state_map(const Selection& sel, int n, double sigma, const Grid& grid);

struct NumericFisher {
  FisherMatrix fisher;
  /// Largest relative disagreement between the step and 10*step estimates.
  double step_discrepancy = 0.0;
  bool step_warning = false;  // discrepancy above 1%
};

/// Pure-state QFIM 4 Re<d_i phi|d_j phi> - 4 Re(<d_i phi|phi><phi|d_j phi>) by central differences.
NumericFisher qfim_numeric(const StateMap& map, const ParamVector& g0, double step = 1e-5);

/// Inverse of F.trials, or an unbounded result with the null direction.
CovarianceBound qcrb(const FisherMatrix& f);

/// Per-trial quadrature of sum (dP/dg_i)(dP/dg_j)/P over the first-order density.
FisherMatrix cfim_mle_numeric(int n, double sigma, complex_t weak_value, const ParamVector& g0,
                              const Grid& grid);

/// Homodyne CFIM from the four port probabilities P = I / sum(I) with the
/// multinomial weight N' + N_LO. Returned per N' trial.
FisherMatrix cfim_homodyne(int n, double sigma, complex_t weak_value, const LocalOscillator& lo1,
                           const LocalOscillator& lo2, double source_count, double lo_photons,
                           double success_probability, const ParamVector& g0 = {});

/// Closed-form diagonal valid for N_LO >> N' (off-diagonal left zero).
FisherMatrix cfim_homodyne_asymptotic(int n, double sigma, complex_t weak_value, const LocalOscillator& lo1,
                                      const LocalOscillator& lo2, double signal_photons);

/// Tr(F Q^-1) using total matrices.
double tradeoff_trace(const FisherMatrix& f, const FisherMatrix& q);

struct LoCheck {
  bool optimal = false;
  double phase_residual = 0.0;  // |Re(A_w^2 a* b*) + |A_w a||A_w b|| / (|A_w|^2 |a||b|)
  double ratio_residual = 0.0;  // | |a| sqrt(n+1) - |b| sqrt(n) | / sqrt(2n+1)
  std::string explanation;
};

/// Equality conditions of the homodyne tradeoff for a single LO.
LoCheck optimal_lo_check(const LocalOscillator& lo, complex_t weak_value, int n);

/// <phi|[L_d, L_k]|phi> with L_i = 2(|d_i phi><phi| + |phi><d_i phi|).
complex_t sld_commutator_expectation(const StateMap& map, const ParamVector& g0, double step = 1e-5);

}  // namespace hgwm
