#include <cmath>

#include "hgwm/types.hpp"

namespace hgwm {

SymEigen2 eigen_symmetric(const Mat2& m) {
  const double a = m(0, 0);
  const double b = 0.5 * (m(0, 1) + m(1, 0));
  const double c = m(1, 1);
  const double mean = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), b);
  SymEigen2 e;
  e.values = {mean - radius, mean + radius};
  if (b == 0.0) {
    if (a <= c) {
      e.vectors = {{{1.0, 0.0}, {0.0, 1.0}}};
    } else {
      e.vectors = {{{0.0, 1.0}, {1.0, 0.0}}};
    }
    return e;
  }
  for (int i = 0; i < 2; ++i) {
    // (A - l I) v = 0  ->  v = (b, l - a) or (l - c, b); pick the better conditioned one
    double vx = b, vy = e.values[i] - a;
    const double ux = e.values[i] - c, uy = b;
    if (std::hypot(ux, uy) > std::hypot(vx, vy)) {
      vx = ux;
      vy = uy;
    }
    const double nrm = std::hypot(vx, vy);
    e.vectors[i] = {vx / nrm, vy / nrm};
  }
  return e;
}

}  // namespace hgwm
