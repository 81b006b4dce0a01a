#include "hgwm/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hgwm/errors.hpp"
#include "hgwm/parallel.hpp"
#include "hgwm/weak_process.hpp"

namespace hgwm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Coefficients {
  complex_t lower;  // on phi_{n-1}
  complex_t upper;  // on phi_{n+1}
  double norm2;     // including the unit phi_n weight
};

Coefficients coefficients(const PointerModel& m, const ParamVector& g) {
  const complex_t disp = m.weak_value * g.d / (2.0 * m.sigma);
  const complex_t kick = kI * m.weak_value * m.sigma * g.k;
  Coefficients c;
  c.lower = m.n > 0 ? -(disp + kick) * std::sqrt(static_cast<double>(m.n)) : complex_t{};
  c.upper = (disp - kick) * std::sqrt(m.n + 1.0);
  c.norm2 = 1.0 + std::norm(c.lower) + std::norm(c.upper);
  return c;
}

// phi_{n-1}, phi_n, phi_{n+1} at each sample; independent of g
class LikelihoodCache {
 public:
  explicit LikelihoodCache(const SampleBatch& batch) : model_(batch.model) {
    const int n = model_.n;
    std::vector<double> phi(n + 2);
    modes_.reserve(batch.positions.size());
    for (double x : batch.positions) {
      hg_wavefunctions(model_.sigma, x, phi);
      modes_.push_back({n > 0 ? phi[n - 1] : 0.0, phi[n], phi[n + 1]});
    }
  }

  double operator()(const ParamVector& g) const {
    const Coefficients c = coefficients(model_, g);
    double acc = 0.0;
    for (const auto& m : modes_) {
      const double p = std::norm(c.lower * m[0] + m[1] + c.upper * m[2]);
      if (!(p > 0.0)) return -kInf;
      acc += std::log(p);
    }
    return acc - static_cast<double>(modes_.size()) * std::log(c.norm2);
  }

 private:
  PointerModel model_;
  std::vector<std::array<double, 3>> modes_;
};

using Point = std::array<double, 2>;

struct SimplexResult {
  Point best;
  double value;
  int iterations;
  bool converged;
  std::array<Point, 3> simplex;
};

template <class F>
SimplexResult nelder_mead(F&& f, Point start, double scale, double tol, int max_iter) {
  std::array<Point, 3> x{start, Point{start[0] + scale, start[1]}, Point{start[0], start[1] + scale}};
  std::array<double, 3> fx{f(x[0]), f(x[1]), f(x[2])};
  auto diameter = [&] {
    double dmax = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) dmax = std::max(dmax, std::hypot(x[i][0] - x[j][0], x[i][1] - x[j][1]));
    return dmax;
  };
  int it = 0;
  for (; it < max_iter; ++it) {
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    const std::array<Point, 3> xs{x[order[0]], x[order[1]], x[order[2]]};
    const std::array<double, 3> fs{fx[order[0]], fx[order[1]], fx[order[2]]};
    x = xs;
    fx = fs;
    if (diameter() < tol) break;

    const Point centroid{0.5 * (x[0][0] + x[1][0]), 0.5 * (x[0][1] + x[1][1])};
    auto along = [&](double t) {
      return Point{centroid[0] + t * (x[2][0] - centroid[0]), centroid[1] + t * (x[2][1] - centroid[1])};
    };
    const Point xr = along(-1.0);
    const double fr = f(xr);
    if (fr < fx[0]) {
      const Point xe = along(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        x[2] = xe;
        fx[2] = fe;
      } else {
        x[2] = xr;
        fx[2] = fr;
      }
      continue;
    }
    if (fr < fx[1]) {
      x[2] = xr;
      fx[2] = fr;
      continue;
    }
    const bool outside = fr < fx[2];
    const Point xc = along(outside ? -0.5 : 0.5);
    const double fc = f(xc);
    if (fc < (outside ? fr : fx[2])) {
      x[2] = xc;
      fx[2] = fc;
      continue;
    }
    for (int i = 1; i < 3; ++i) {
      x[i] = Point{x[0][0] + 0.5 * (x[i][0] - x[0][0]), x[0][1] + 0.5 * (x[i][1] - x[0][1])};
      fx[i] = f(x[i]);
    }
  }
  const int best = static_cast<int>(std::min_element(fx.begin(), fx.end()) - fx.begin());
  return SimplexResult{x[best], fx[best], it, it < max_iter, x};
}

}  // namespace

PointerSampler::PointerSampler(const PointerModel& model, const ParamVector& g, std::size_t grid_size)
    : model_(model), g_(g), grid_(make_grid(std::max(12, model.n + 2), model.sigma, grid_size)) {
  const HGState state = final_state_first_order(model.n, model.sigma, model.weak_value, g);
  const cvector amp = to_grid(state, grid_);
  cdf_.assign(grid_.size(), 0.0);
  const double h = grid_.spacing();
  for (std::size_t j = 1; j < grid_.size(); ++j)
    cdf_[j] = cdf_[j - 1] + 0.5 * h * (std::norm(amp[j - 1]) + std::norm(amp[j]));
  const double total = cdf_.back();
  for (double& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

double PointerSampler::draw(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u = uni(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t j = static_cast<std::size_t>(it - cdf_.begin());
  j = std::clamp<std::size_t>(j, 1, cdf_.size() - 1);
  const double lo = cdf_[j - 1], hi = cdf_[j];
  const double t = hi > lo ? (u - lo) / (hi - lo) : 0.5;
  return grid_.points[j - 1] + t * (grid_.points[j] - grid_.points[j - 1]);
}

SampleBatch PointerSampler::sample(std::size_t count, std::uint64_t seed, std::uint64_t stream) const {
  SampleBatch b;
  b.seed = seed;
  b.stream = stream;
  b.model = model_;
  b.generated_at = g_;
  b.positions.resize(count);
  std::mt19937_64 rng = trial_stream(seed, stream);
  for (double& x : b.positions) x = draw(rng);
  return b;
}

SampleBatch sample_positions(int n, double sigma, complex_t aw, const ParamVector& g, std::size_t count,
                             std::uint64_t seed) {
  if (count < 1) throw DomainError("sample count must be at least 1");
  return PointerSampler(PointerModel{n, sigma, aw}, g).sample(count, seed);
}

double pointer_density(const PointerModel& m, const ParamVector& g, double x) {
  std::vector<double> phi(m.n + 2);
  hg_wavefunctions(m.sigma, x, phi);
  const Coefficients c = coefficients(m, g);
  const complex_t amp = (m.n > 0 ? c.lower * phi[m.n - 1] : complex_t{}) + phi[m.n] + c.upper * phi[m.n + 1];
  return std::norm(amp) / c.norm2;
}

double log_likelihood(const SampleBatch& batch, const ParamVector& g) {
  if (batch.positions.empty()) return 0.0;
  return LikelihoodCache(batch)(g);
}

MleResult mle_fit(const SampleBatch& batch, const MleOptions& opt) {
  if (batch.positions.size() < 100) throw DomainError("MLE needs at least 100 samples");
  const LikelihoodCache loglik(batch);
  const double sigma = batch.model.sigma;
  auto objective = [&](const Point& u) {
    if (std::abs(u[0]) > opt.box || std::abs(u[1]) > opt.box) return kInf;
    return -loglik(ParamVector{u[0] * sigma, u[1] / sigma});
  };
  auto pinned = [&](const Point& u) {
    const double edge = opt.box * (1.0 - 1e-6);
    return std::abs(u[0]) >= edge || std::abs(u[1]) >= edge;
  };

  SimplexResult r = nelder_mead(objective, Point{0.0, 0.0}, opt.initial_scale, opt.tolerance, opt.max_iterations);
  int iterations = r.iterations;
  if (r.converged && pinned(r.best)) {
    const SimplexResult again = nelder_mead(objective, r.best, opt.initial_scale, opt.tolerance, opt.max_iterations);
    iterations += again.iterations;
    if (again.value <= r.value) r = again;
    r.converged = again.converged;
  }
  if (!r.converged) {
    std::ostringstream msg;
    msg << "Nelder-Mead did not converge in " << opt.max_iterations << " iterations; simplex:";
    for (const Point& p : r.simplex) msg << " (" << p[0] << ", " << p[1] << ")";
    throw NumericalError(msg.str());
  }

  MleResult out;
  out.estimate = ParamVector{r.best[0] * sigma, r.best[1] / sigma};
  out.log_likelihood = -r.value;
  out.iterations = iterations;
  out.boundary_pinned = pinned(r.best);
  out.degenerate = !qcrb(cfim_mle_analytic(batch.model.n, sigma, batch.model.weak_value, 1.0, 1.0)).bounded;
  return out;
}

ErrorEllipse error_ellipse(const Mat2& cov, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("confidence must lie in (0, 1)");
  ErrorEllipse e;
  e.confidence = confidence;
  const double scale = std::sqrt(-2.0 * std::log1p(-confidence));
  if (!std::isfinite(cov(0, 0)) || !std::isfinite(cov(1, 1))) {
    e.semi_major = kInf;
    e.semi_minor = kInf;
    return e;
  }
  const SymEigen2 eig = eigen_symmetric(cov);
  e.semi_major = scale * std::sqrt(std::max(eig.values[1], 0.0));
  e.semi_minor = scale * std::sqrt(std::max(eig.values[0], 0.0));
  e.angle = std::atan2(eig.vectors[1][1], eig.vectors[1][0]);
  return e;
}

Mat2 sample_covariance(const std::vector<ParamVector>& rows) {
  double sd = 0.0, sk = 0.0;
  std::size_t count = 0;
  for (const auto& r : rows) {
    if (std::isnan(r.d) || std::isnan(r.k)) continue;
    sd += r.d;
    sk += r.k;
    ++count;
  }
  if (count < 2) throw DomainError("sample covariance needs at least two rows");
  const double md = sd / count, mk = sk / count;
  double cdd = 0.0, cdk = 0.0, ckk = 0.0;
  for (const auto& r : rows) {
    if (std::isnan(r.d) || std::isnan(r.k)) continue;
    cdd += (r.d - md) * (r.d - md);
    cdk += (r.d - md) * (r.k - mk);
    ckk += (r.k - mk) * (r.k - mk);
  }
  const double denom = static_cast<double>(count - 1);
  return Mat2::symmetric(cdd / denom, cdk / denom, ckk / denom);
}

EnsembleResult run_ensemble(const EnsembleConfig& cfg) {
  if (cfg.trials < 2) throw DomainError("ensemble needs at least two trials for a covariance");
  if (cfg.samples < 100) throw DomainError("ensemble needs at least 100 samples per trial");
  const PointerModel model{cfg.n, cfg.sigma, cfg.weak_value};
  const PointerSampler sampler(model, cfg.g_true);

  EnsembleResult out;
  out.estimates.assign(cfg.trials, ParamVector{});
  out.pinned.assign(cfg.trials, 0);
  out.failed.assign(cfg.trials, 0);
  parallel_for(cfg.trials, [&](std::size_t t) {
    const SampleBatch batch = sampler.sample(cfg.samples, cfg.seed, t);
    try {
      const MleResult fit = mle_fit(batch, cfg.mle);
      out.estimates[t] = fit.estimate;
      out.pinned[t] = fit.boundary_pinned ? 1 : 0;
    } catch (const NumericalError&) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      out.estimates[t] = ParamVector{nan, nan};
      out.failed[t] = 1;
    }
  });

  for (std::size_t t = 0; t < cfg.trials; ++t) {
    out.pinned_count += out.pinned[t];
    out.failed_count += out.failed[t];
  }
  if (out.failed_count * 100 > cfg.trials) {
    throw NumericalError("MLE failed in " + std::to_string(out.failed_count) + " of " +
                         std::to_string(cfg.trials) + " trials");
  }

  std::vector<ParamVector> errors(cfg.trials);
  double md = 0.0, mk = 0.0;
  std::size_t ok = 0;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    errors[t] = ParamVector{out.estimates[t].d - cfg.g_true.d, out.estimates[t].k - cfg.g_true.k};
    if (out.failed[t]) continue;
    md += errors[t].d;
    mk += errors[t].k;
    ++ok;
  }
  out.mean_error = ParamVector{md / ok, mk / ok};
  out.sample_cov = sample_covariance(errors);
  out.theory_cov = qcrb(cfim_mle_analytic(cfg.n, cfg.sigma, cfg.weak_value, 1.0, static_cast<double>(cfg.samples)));
  out.degenerate = !out.theory_cov.bounded;
  out.ellipse = error_ellipse(out.theory_cov.m, cfg.confidence);
  out.sample_ellipse = error_ellipse(out.sample_cov, cfg.confidence);
  return out;
}

}  // namespace hgwm
