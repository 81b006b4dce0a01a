#include <algorithm>
#include <cmath>
#include <numeric>

#include <doctest.h>

#include "hgwm/errors.hpp"
#include "hgwm/estimation.hpp"
#include "hgwm/parallel.hpp"
#include "oracles.hpp"

using namespace hgwm;

namespace {

const complex_t kAw = weak_value(polarization_selection(0.01));

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

// CDF of the first-order density from Simpson integration of the oracle wavefunctions.
struct CdfOracle {
  std::vector<double> x, cdf;
  CdfOracle(int n, const ParamVector& g, double a) {
    auto density = [&](double y) {
      const double h = 1e-4;
      const double f = oracle::hg(n, 1.0, y);
      const double df = (oracle::hg(n, 1.0, y + h) - oracle::hg(n, 1.0, y - h)) / (2 * h);
      return std::norm(f - kAw * g.d * df - kI * kAw * g.k * y * f);
    };
    const int cells = 8000;
    const double step = 2 * a / cells;
    x.push_back(-a);
    cdf.push_back(0.0);
    for (int i = 0; i < cells; ++i) {
      const double lo = -a + i * step;
      x.push_back(lo + step);
      cdf.push_back(cdf.back() + oracle::simpson(density, lo, lo + step, 4));
    }
    for (double& c : cdf) c /= cdf.back();
  }
  double operator()(double y) const {
    if (y <= x.front()) return 0.0;
    if (y >= x.back()) return 1.0;
    const auto it = std::upper_bound(x.begin(), x.end(), y);
    const std::size_t i = it - x.begin();
    const double t = (y - x[i - 1]) / (x[i] - x[i - 1]);
    return cdf[i - 1] + t * (cdf[i] - cdf[i - 1]);
  }
};

double ks_statistic(std::vector<double> s, const CdfOracle& f) {
  std::sort(s.begin(), s.end());
  double d = 0;
  const double n = s.size();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double c = f(s[i]);
    d = std::max({d, std::abs(c - i / n), std::abs((i + 1) / n - c)});
  }
  return d;
}

}  // namespace

TEST_CASE("sampling pure modes") {
  const SampleBatch b0 = sample_positions(0, 1.0, kAw, {}, 1000000, 42);
  CHECK(std::abs(mean(b0.positions)) < 3e-3);
  CHECK(variance(b0.positions) == doctest::Approx(1.0).epsilon(1e-2));
  const SampleBatch b2 = sample_positions(2, 1.0, kAw, {}, 200000, 43);
  CHECK(variance(b2.positions) == doctest::Approx(5.0).epsilon(2e-2));
}

TEST_CASE("sampling is deterministic") {
  const SampleBatch a = sample_positions(1, 1.0, kAw, {1e-4, 0}, 1000, 9);
  const SampleBatch b = sample_positions(1, 1.0, kAw, {1e-4, 0}, 1000, 9);
  CHECK(a.positions == b.positions);
  const SampleBatch c = sample_positions(1, 1.0, kAw, {1e-4, 0}, 1000, 10);
  CHECK(a.positions != c.positions);
}

TEST_CASE("sampler passes a KS test against an independent CDF") {
  for (int n = 0; n <= 5; ++n) {
    const CdfOracle f(n, {}, 15.0);
    const SampleBatch b = sample_positions(n, 1.0, kAw, {}, 1000000, 100 + n);
    CHECK(ks_statistic(b.positions, f) < 0.002);
  }
  const CdfOracle f(2, {2e-4, -1e-4}, 15.0);
  const SampleBatch b = sample_positions(2, 1.0, kAw, {2e-4, -1e-4}, 1000000, 77);
  CHECK(ks_statistic(b.positions, f) < 0.002);
}

TEST_CASE("pointer density") {
  const PointerModel m{3, 1.0, kAw};
  for (double x : {-2.0, 0.3, 1.1}) CHECK(pointer_density(m, {}, x) == doctest::Approx(std::pow(oracle::hg(3, 1.0, x), 2)));
  const double total = oracle::simpson([&](double x) { return pointer_density(m, {3e-4, 2e-4}, x); }, -15, 15, 4000);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("log-likelihood") {
  SampleBatch empty;
  empty.model = {1, 1.0, kAw};
  CHECK(log_likelihood(empty, {}) == 0.0);

  SampleBatch one;
  one.model = {2, 1.0, kAw};
  one.positions = {std::sqrt(5.0)};
  CHECK(log_likelihood(one, {}) == doctest::Approx(std::log(std::pow(oracle::hg(2, 1.0, std::sqrt(5.0)), 2))));

  const SampleBatch b = sample_positions(1, 1.0, kAw, {}, 10000, 5);
  CHECK(log_likelihood(b, {}) > log_likelihood(b, {0.01, 0}));
  CHECK(log_likelihood(b, {}) > log_likelihood(b, {-0.01, 0}));
  double direct = 0;
  for (double x : b.positions) direct += std::log(pointer_density(b.model, {1e-4, 2e-5}, x));
  CHECK(log_likelihood(b, {1e-4, 2e-5}) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("maximum likelihood fit") {
  SUBCASE("n = 1 lands inside the 5-sigma ellipse") {
    const SampleBatch b = sample_positions(1, 1.0, kAw, {}, 500, 2024);
    const MleResult r = mle_fit(b);
    CHECK_FALSE(r.degenerate);
    const FisherMatrix f = cfim_mle_analytic(1, 1.0, kAw, 1.0, 500);
    const Mat2 F = f.total();
    const double e0 = r.estimate.d, e1 = r.estimate.k;
    const double maha = F(0, 0) * e0 * e0 + 2 * F(0, 1) * e0 * e1 + F(1, 1) * e1 * e1;
    CHECK(maha < 25.0);
    CHECK(r.log_likelihood >= log_likelihood(b, {}));
  }
  SUBCASE("n = 2 recovers a displacement") {
    const SampleBatch b = sample_positions(2, 1.0, kAw, {1e-4, 0}, 100000, 31);
    const MleResult r = mle_fit(b);
    const CovarianceBound c = qcrb(cfim_mle_analytic(2, 1.0, kAw, 1.0, 100000));
    CHECK(std::abs(r.estimate.d - 1e-4) < 3 * std::sqrt(c.m(0, 0)));
    CHECK(std::abs(r.estimate.k) < 3 * std::sqrt(c.m(1, 1)));
  }
  SUBCASE("n = 0 is flagged degenerate") {
    const SampleBatch b = sample_positions(0, 1.0, kAw, {}, 500, 8);
    CHECK(mle_fit(b).degenerate);
  }
}

TEST_CASE("error ellipse") {
  const ErrorEllipse e = error_ellipse(Mat2::diag(4.0, 1.0), kOneSigma2d);
  CHECK(e.semi_major == doctest::Approx(2.0));
  CHECK(e.semi_minor == doctest::Approx(1.0));
  CHECK(std::abs(std::sin(e.angle)) < 1e-12);
  const ErrorEllipse r = error_ellipse(Mat2::symmetric(1.0, 0.0, 9.0), 0.95);
  const double scale = std::sqrt(-2 * std::log(0.05));
  CHECK(r.semi_major == doctest::Approx(3 * scale));
  CHECK(std::abs(std::cos(r.angle)) < 1e-12);
  CHECK_THROWS_AS(error_ellipse(Mat2::diag(1, 1), 1.5), DomainError);
}

TEST_CASE("sample covariance skips failed rows") {
  const double nan = std::nan("");
  const std::vector<ParamVector> rows{{1, 2}, {3, 4}, {nan, 0}, {5, 9}};
  const Mat2 c = sample_covariance(rows);
  CHECK(c(0, 0) == doctest::Approx(4.0));
  CHECK(c(0, 1) == doctest::Approx(7.0));
  CHECK(c(1, 1) == doctest::Approx(13.0));
}

TEST_CASE("ensemble") {
  EnsembleConfig cfg;
  cfg.n = 1;
  cfg.weak_value = kAw;
  cfg.success_probability = postselect_probability(polarization_selection(0.01));
  cfg.samples = 500;
  cfg.trials = 40;
  cfg.seed = 123;

  SUBCASE("deterministic") {
    const EnsembleResult a = run_ensemble(cfg);
    const EnsembleResult b = run_ensemble(cfg);
    REQUIRE(a.estimates.size() == b.estimates.size());
    for (std::size_t i = 0; i < a.estimates.size(); ++i) {
      CHECK(a.estimates[i].d == b.estimates[i].d);
      CHECK(a.estimates[i].k == b.estimates[i].k);
    }
  }
  SUBCASE("one trial is refused") {
    cfg.trials = 1;
    CHECK_THROWS_AS(run_ensemble(cfg), DomainError);
  }
  SUBCASE("theory area shrinks with order") {
    cfg.trials = 2;
    const EnsembleResult r1 = run_ensemble(cfg);
    cfg.n = 3;
    const EnsembleResult r3 = run_ensemble(cfg);
    const double expected = cfim_mle_analytic(1, 1.0, kAw, 1.0, 1.0).m.det() / cfim_mle_analytic(3, 1.0, kAw, 1.0, 1.0).m.det();
    CHECK(r3.theory_cov.m.det() / r1.theory_cov.m.det() == doctest::Approx(expected).epsilon(1e-10));
    CHECK(r3.ellipse.semi_major * r3.ellipse.semi_minor < r1.ellipse.semi_major * r1.ellipse.semi_minor);
  }
}

TEST_CASE("trial streams and parallel loop") {
  auto a = trial_stream(5, 0), b = trial_stream(5, 0), c = trial_stream(5, 1), d = trial_stream(6, 0);
  const auto va = a();
  CHECK(va == b());
  CHECK(va != c());
  CHECK(va != d());

  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw NumericalError("boom");
                  }),
                  NumericalError);
}
