#pragma once

#include <array>
#include <span>

#include "hgwm/hermite_gauss.hpp"
#include "hgwm/types.hpp"

namespace hgwm {

using Spinor = std::array<complex_t, 2>;
using Operator2 = std::array<std::array<complex_t, 2>, 2>;

/// Pre-selection |i>, post-selection |f> and the system observable A of a
/// two-level weak measurement. Construction checks normalization and
/// hermiticity to 1e-12.
class Selection {
 public:
  Selection(Spinor pre, Spinor post, Operator2 observable);

  const Spinor& pre() const { return pre_; }
  const Spinor& post() const { return post_; }
  const Operator2& observable() const { return observable_; }

  /// <f|i>
  complex_t overlap() const;
  /// <f|A|i>
  complex_t transition_element() const;

 private:
  Spinor pre_;
  Spinor post_;
  Operator2 observable_;
};

enum class Observable {
  pauli_z,                // |H><H| - |V><V|
  pauli_z_plus_identity,  // Mach-Zehnder coupling, sigma_z + 1
  identity,
};

Operator2 observable_matrix(Observable which);

/// |i> = (|H> + |V>)/sqrt2,
/// |f> = e^{i eps/2} cos(pi/4 + eps/2)|H> - e^{-i eps/2} sin(pi/4 + eps/2)|V>.
/// For sigma_z this yields A_w ~ (-1 + i)/eps and P_s ~ eps^2/2.
Selection polarization_selection(double epsilon, Observable which = Observable::pauli_z);

/// <f|A|i> / <f|i>. Throws DomainError when |<f|i>| <= 1e-12.
complex_t weak_value(const Selection& s);

/// |<f|i>|^2
double postselect_probability(const Selection& s);

enum class FirstOrderValidity { ok, warn, reject };

/// Classifies max(|d|/sigma, |k| sigma): above 0.01 warns, above 0.1 rejects.
FirstOrderValidity first_order_validity(const ParamVector& g, double sigma);

/// Normalized first-order final pointer state
/// phi_n - (A_w d/2sigma + i A_w sigma k) sqrt(n) phi_{n-1}
///       + (A_w d/2sigma - i A_w sigma k) sqrt(n+1) phi_{n+1}.
/// Throws DomainError when the parameters fail the smallness check.
HGState final_state_first_order(int n, double sigma, complex_t weak_value, const ParamVector& g);

/// Same coefficients, not normalized.
HGState first_order_unnormalized(int n, double sigma, complex_t weak_value, const ParamVector& g);

struct ExactFinalState {
  cvector amplitudes;  // <f|U|i> phi_n, unnormalized
  double success_probability = 0.0;
  cvector normalized;
};

/// Post-selected pointer after the full unitary exp(-i A (d p + k x)).
///
/// Each eigenbranch a of A contributes <f|a><a|i> e^{-i a k (x - a d / 2)} phi_n(x - a d)
/// (symmetric ordering of the displacement), sampled on the grid.
ExactFinalState final_state_exact(const Selection& s, int n, double sigma, const ParamVector& g,
                                  const Grid& grid);

double position_mean(const HGState& s);
double position_variance(const HGState& s);
double position_mean(std::span<const complex_t> amplitudes, const Grid& g);
double position_variance(std::span<const complex_t> amplitudes, const Grid& g);

}  // namespace hgwm
