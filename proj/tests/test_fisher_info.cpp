#include <cmath>
#include <random>

#include <doctest.h>

#include "hgwm/errors.hpp"
#include "hgwm/fisher_info.hpp"
#include "hgwm/homodyne_sim.hpp"
#include "oracles.hpp"

using namespace hgwm;

namespace {

const complex_t kAw(-100, 100);

void check_symmetric_psd(const Mat2& m) {
  CHECK(m(0, 1) == doctest::Approx(m(1, 0)));
  const double scale = std::abs(m(0, 0)) + std::abs(m(1, 1)) + 1e-300;
  CHECK(m(0, 0) >= -1e-12 * scale);
  CHECK(m(1, 1) >= -1e-12 * scale);
  CHECK(m.det() >= -1e-9 * scale * scale);
}

LocalOscillator random_lo(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  complex_t a(g(rng), g(rng)), b(g(rng), g(rng));
  const double nrm = std::sqrt(std::norm(a) + std::norm(b));
  return {a / nrm, b / nrm, n};
}

}  // namespace

TEST_CASE("analytic QFIM") {
  const double aw2 = 2e4;
  const complex_t aw(std::sqrt(aw2 / 2), std::sqrt(aw2 / 2));
  const FisherMatrix q0 = qfim_analytic(0, 1.0, aw, 1.0, 1.0);
  CHECK(q0.m(0, 0) == doctest::Approx(2e4));
  CHECK(q0.m(1, 1) == doctest::Approx(8e4));
  CHECK(q0.m(0, 1) == 0.0);
  const FisherMatrix q1 = qfim_analytic(1, 1.0, aw, 1.0, 1.0);
  CHECK(q1.m(0, 0) / q0.m(0, 0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(q1.m(1, 1) / q0.m(1, 1) == doctest::Approx(3.0).epsilon(1e-15));
  const FisherMatrix z = qfim_analytic(2, 1.0, 0.0, 1.0, 1.0);
  CHECK(z.m(0, 0) == 0.0);
  CHECK(z.m(1, 1) == 0.0);
  for (int n = 0; n <= 6; ++n)
    for (double sigma : {0.3, 1.0, 2.5}) {
      const FisherMatrix q = qfim_analytic(n, sigma, kAw, 5e-5, 1e7);
      CHECK(q.total()(0, 0) == doctest::Approx(5e-5 * 1e7 * (2 * n + 1) * std::norm(kAw) / (sigma * sigma)));
      CHECK(q.total()(1, 1) == doctest::Approx(5e-5 * 1e7 * 4 * (2 * n + 1) * std::norm(kAw) * sigma * sigma));
    }
}

TEST_CASE("numeric QFIM agrees with the closed form") {
  const Selection sel = polarization_selection(0.01);
  const complex_t aw = weak_value(sel);
  const Grid grid = default_grid();
  for (int n = 0; n <= 5; ++n) {
    const FisherMatrix q = qfim_analytic(n, 1.0, aw, 1.0, 1.0);
    const NumericFisher fo = qfim_numeric(first_order_state_map(n, 1.0, aw), {});
    CHECK(fo.fisher.m(0, 0) == doctest::Approx(q.m(0, 0)).epsilon(5e-3));
    CHECK(fo.fisher.m(1, 1) == doctest::Approx(q.m(1, 1)).epsilon(5e-3));
    CHECK(std::abs(fo.fisher.m(0, 1)) < 1e-6 * q.m(1, 1));
    CHECK_FALSE(fo.step_warning);
    const NumericFisher ex = qfim_numeric(exact_state_map(sel, n, 1.0, grid), {});
    CHECK(ex.fisher.m(0, 0) == doctest::Approx(q.m(0, 0)).epsilon(1e-2));
    CHECK(ex.fisher.m(1, 1) == doctest::Approx(q.m(1, 1)).epsilon(1e-2));
    check_symmetric_psd(ex.fisher.m);
  }
}

TEST_CASE("numeric QFIM of a k-independent family") {
  StateMap map;
  map.state = [](const ParamVector& g) {
    const HGState s = final_state_first_order(1, 1.0, kAw, {g.d, 0});
    return s.coeffs;
  };
  const NumericFisher f = qfim_numeric(map, {});
  CHECK(std::abs(f.fisher.m(1, 1)) <= 1e-6 * f.fisher.m(0, 0));
  CHECK(std::abs(sld_commutator_expectation(map, {})) < 1e-6);
}

TEST_CASE("numeric QFIM rejects unnormalized maps") {
  StateMap map;
  map.state = [](const ParamVector&) { return cvector{2.0, 0.0}; };
  CHECK_THROWS_AS(qfim_numeric(map, {}), DomainError);
}

TEST_CASE("mean position and momentum of H-G modes vanish") {
  // this is what lets the single-term QFIM expression coincide with the full one
  for (int n = 0; n <= 8; ++n) {
    const HGState phi = HGState::mode(n, 1.0);
    CHECK(std::abs(inner_product(phi, ladder_apply(LadderOp::position, phi))) < 1e-15);
    CHECK(std::abs(inner_product(phi, ladder_apply(LadderOp::derivative, phi))) < 1e-15);
  }
}

TEST_CASE("quantum Cramer-Rao bound") {
  const complex_t aw(100, 100);
  const CovarianceBound b = qcrb(qfim_analytic(0, 1.0, aw, 1.0, 1.0));
  CHECK(b.bounded);
  CHECK(b.m(0, 0) == doctest::Approx(5e-5));
  CHECK(b.m(1, 1) == doctest::Approx(1.25e-5));
  FisherMatrix id;
  id.m = Mat2::diag(1, 1);
  id.trials = 4;
  const CovarianceBound bi = qcrb(id);
  CHECK(bi.m(0, 0) == doctest::Approx(0.25));
  CHECK(bi.m(1, 1) == doctest::Approx(0.25));

  const FisherMatrix f0 = cfim_mle_analytic(0, 1.0, kAw, 1.0, 1.0);
  const CovarianceBound s = qcrb(f0);
  CHECK_FALSE(s.bounded);
  // null direction annihilated by F
  const double v0 = s.null_direction[0], v1 = s.null_direction[1];
  CHECK(std::hypot(v0, v1) == doctest::Approx(1.0));
  CHECK(std::abs(f0.m(0, 0) * v0 + f0.m(0, 1) * v1) < 1e-8 * f0.m(1, 1));
  CHECK(std::abs(f0.m(1, 0) * v0 + f0.m(1, 1) * v1) < 1e-8 * f0.m(1, 1));
}

TEST_CASE("analytic CFIM of position counting") {
  const FisherMatrix f = cfim_mle_analytic(1, 1.0, kAw, 1.0, 1.0);
  CHECK(f.m(0, 0) == doctest::Approx(3e4));
  CHECK(f.m(0, 1) == doctest::Approx(-2e4));
  CHECK(f.m(1, 0) == doctest::Approx(-2e4));
  CHECK(f.m(1, 1) == doctest::Approx(1.2e5));
  for (complex_t aw : {complex_t(3, -7), complex_t(-50, 20), kAw})
    CHECK(std::abs(cfim_mle_analytic(0, 1.7, aw, 1.0, 1.0).m.det()) < 1e-9 * std::pow(std::norm(aw), 2));
  const FisherMatrix r = cfim_mle_analytic(2, 1.0, complex_t(-80, 0), 1.0, 1.0);
  CHECK(r.m(0, 1) == 0.0);
  CHECK(r.m(1, 1) == 0.0);
  check_symmetric_psd(r.m);
}

TEST_CASE("numeric CFIM agrees with the closed form") {
  const Grid grid = default_grid();
  const complex_t aw = weak_value(polarization_selection(0.01));
  for (int n = 1; n <= 5; ++n) {
    const FisherMatrix a = cfim_mle_analytic(n, 1.0, aw, 1.0, 1.0);
    const FisherMatrix f = cfim_mle_numeric(n, 1.0, aw, {}, grid);
    CHECK(f.m(0, 0) == doctest::Approx(a.m(0, 0)).epsilon(5e-3));
    CHECK(f.m(0, 1) == doctest::Approx(a.m(0, 1)).epsilon(5e-3));
    CHECK(f.m(1, 1) == doctest::Approx(a.m(1, 1)).epsilon(5e-3));
    check_symmetric_psd(f.m);
  }
  const FisherMatrix im = cfim_mle_numeric(2, 1.0, complex_t(0, 100), {}, grid);
  CHECK(std::abs(im.m(0, 0)) < 1e-9);
}

TEST_CASE("mode moment integrals by independent quadrature") {
  for (double sigma : {0.6, 1.0, 2.0})
    for (int n = 0; n <= 5; ++n) {
      auto phi = [&](double x) { return oracle::hg(n, sigma, x); };
      auto dphi = [&](double x) { return oracle::derivative(phi, x, 1e-3 * sigma); };
      const double a = 15 * sigma;
      const double i1 = oracle::simpson([&](double x) { return dphi(x) * dphi(x); }, -a, a, 6000);
      const double i2 = oracle::simpson([&](double x) { return x * x * phi(x) * phi(x); }, -a, a, 6000);
      const double i3 = oracle::simpson([&](double x) { return x * dphi(x) * phi(x); }, -a, a, 6000);
      CHECK(i1 == doctest::Approx((2 * n + 1) / (4 * sigma * sigma)).epsilon(1e-8));
      CHECK(i2 == doctest::Approx((2 * n + 1) * sigma * sigma).epsilon(1e-8));
      CHECK(i3 == doctest::Approx(-0.5).epsilon(1e-8));
    }
}

TEST_CASE("MLE tradeoff trace is one") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-200, 200), s(0.2, 5.0);
  std::uniform_int_distribution<int> order(0, 8);
  for (int t = 0; t < 1000; ++t) {
    const complex_t aw(u(rng), u(rng));
    const int n = order(rng);
    const double sigma = s(rng);
    const double tr = tradeoff_trace(cfim_mle_analytic(n, sigma, aw, 1.0, 1.0), qfim_analytic(n, sigma, aw, 1.0, 1.0));
    CHECK(std::abs(tr - 1.0) < 1e-12);
  }
}

TEST_CASE("homodyne CFIM") {
  const double ps = 5e-5, source = 1e7, lo = 1e4 * ps * source;
  SUBCASE("optimal LOs reach the QFIM per trial") {
    for (int n = 1; n <= 5; ++n) {
      const auto [l1, l2] = optimal_lo_pair(n);
      const FisherMatrix f = cfim_homodyne(n, 1.0, kAw, l1, l2, source, lo, ps);
      const double base = (2 * n + 1) * std::norm(kAw);
      CHECK(f.m(0, 0) == doctest::Approx(base / 2).epsilon(1e-2));
      CHECK(f.m(1, 1) == doctest::Approx(base * 2).epsilon(1e-2));
      const FisherMatrix q = qfim_analytic(n, 1.0, kAw, ps, source);
      CHECK(tradeoff_trace(f, q) == doctest::Approx(1.0).epsilon(1e-3));
      const FisherMatrix as = cfim_homodyne_asymptotic(n, 1.0, kAw, l1, l2, ps * source);
      CHECK(f.m(0, 0) == doctest::Approx(as.m(0, 0)).epsilon(1e-3));
      CHECK(f.m(1, 1) == doctest::Approx(as.m(1, 1)).epsilon(1e-3));
      check_symmetric_psd(f.m);
    }
  }
  SUBCASE("single-mode LOs fall short") {
    for (int n = 1; n <= 4; ++n) {
      const LocalOscillator a{1.0, 0.0, n}, b{0.0, 1.0, n};
      const FisherMatrix f = cfim_homodyne(n, 1.0, kAw, a, b, source, lo, ps);
      CHECK(tradeoff_trace(f, qfim_analytic(n, 1.0, kAw, ps, source)) < 1.0 - 1e-3);
    }
  }
  SUBCASE("zero weak value") {
    const auto [l1, l2] = optimal_lo_pair(2);
    const FisherMatrix f = cfim_homodyne(2, 1.0, 0.0, l1, l2, source, lo, ps);
    CHECK(std::abs(f.m(0, 0)) < 1e-12);
    CHECK(std::abs(f.m(1, 1)) < 1e-12);
  }
  SUBCASE("requires a strong LO") {
    const auto [l1, l2] = optimal_lo_pair(1);
    CHECK_THROWS_AS(cfim_homodyne(1, 1.0, kAw, l1, l2, source, 10 * ps * source, ps), DomainError);
  }
}

TEST_CASE("homodyne tradeoff is bounded by one") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-150, 150);
  std::uniform_int_distribution<int> order(0, 4);
  const double ps = 5e-5, source = 1e7, lo = 1e4 * ps * source;
  int optimal_hits = 0;  // n >= 1 draws meeting both equality conditions
  for (int t = 0; t < 1000; ++t) {
    const int n = order(rng);
    const complex_t aw(u(rng), u(rng));
    LocalOscillator l1 = random_lo(rng, n), l2 = random_lo(rng, n);
    if (n == 0) l1.alpha = 0.0, l1.beta = 1.0, l2.alpha = 0.0, l2.beta = 1.0;
    const double tr = tradeoff_trace(cfim_homodyne(n, 1.0, aw, l1, l2, source, lo, ps),
                                     qfim_analytic(n, 1.0, aw, ps, source));
    CHECK(tr <= 1.0 + 1e-9);
    const bool opt = optimal_lo_check(l1, aw, n).optimal && optimal_lo_check(l2, aw, n).optimal;
    if (n >= 1) {
      optimal_hits += opt;
      if (!opt) CHECK(tr < 1.0 - 1e-3);
    }
  }
  CHECK(optimal_hits == 0);
}

TEST_CASE("optimal LO conditions") {
  const auto [l1, l2] = optimal_lo_pair(2);
  CHECK(optimal_lo_check(l1, kAw, 2).optimal);
  CHECK(optimal_lo_check(l2, kAw, 2).optimal);
  CHECK_FALSE(optimal_lo_check({1.0, 0.0, 2}, kAw, 2).optimal);
  CHECK_FALSE(optimal_lo_check(l1, complex_t(-100, 0), 2).optimal);
  const auto [s1, s2] = beam_splitter_lo_pair(2);
  const LoCheck c = optimal_lo_check(s1, complex_t(-100, 100), 2);
  CHECK(c.phase_residual < 1e-9);
  CHECK(c.ratio_residual > 1e-3);
  CHECK_FALSE(c.optimal);
  CHECK_FALSE(c.explanation.empty());
}

TEST_CASE("SLD commutator") {
  // <[L_d, L_k]> = 8i Im<d_d phi|d_k phi> = -4i |A_w|^2 for the weak-measurement pointer
  const Selection sel = polarization_selection(0.01);
  const complex_t aw = weak_value(sel);
  const Grid grid = default_grid();
  for (int n = 0; n <= 5; ++n) {
    const complex_t fo = sld_commutator_expectation(first_order_state_map(n, 1.0, aw), {});
    CHECK(std::abs(fo.real()) < 1e-6 * std::norm(aw));
    CHECK(fo.imag() == doctest::Approx(-4 * std::norm(aw)).epsilon(1e-3));
    const complex_t ex = sld_commutator_expectation(exact_state_map(sel, n, 1.0, grid), {});
    CHECK(ex.imag() == doctest::Approx(-4 * std::norm(aw)).epsilon(1e-2));
  }
}
