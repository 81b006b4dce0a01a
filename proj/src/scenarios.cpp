#include "hgwm/scenarios.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hgwm/errors.hpp"
#include "hgwm/estimation.hpp"
#include "hgwm/fisher_info.hpp"
#include "hgwm/homodyne_sim.hpp"

namespace hgwm {

namespace {

using nlohmann::json;

std::uint64_t require_seed(const RunConfig& cfg) {
  if (!cfg.seed) throw UsageError(to_string(cfg.scenario) + " is stochastic and needs --seed");
  return *cfg.seed;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw UsageError(std::string(name) + " must be positive");
}

// distinct master seed per pointer order
std::uint64_t order_seed(std::uint64_t seed, int n) {
  return seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(n + 1));
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json mat_json(const Mat2& m) {
  return json::array({json::array({nullable(m(0, 0)), nullable(m(0, 1))}),
                      json::array({nullable(m(1, 0)), nullable(m(1, 1))})});
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::qfim_scan: return "qfim-scan";
    case Scenario::cfim_mle: return "cfim-mle";
    case Scenario::ellipse: return "ellipse";
    case Scenario::homodyne_mc: return "homodyne-mc";
    case Scenario::expt_limits: return "expt-limits";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& name) {
  for (Scenario s : {Scenario::qfim_scan, Scenario::cfim_mle, Scenario::ellipse, Scenario::homodyne_mc,
                     Scenario::expt_limits})
    if (to_string(s) == name) return s;
  throw UsageError("unknown scenario '" + name + "'");
}

std::vector<int> parse_orders(const std::string& spec) {
  std::vector<int> out;
  auto to_int = [&](const std::string& tok) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &pos);
    } catch (const std::exception&) {
      throw UsageError("bad mode order '" + tok + "' in '" + spec + "'");
    }
    if (pos != tok.size() || v < 0 || v > kMaxOrder - 2)
      throw UsageError("bad mode order '" + tok + "' in '" + spec + "'");
    return v;
  };
  const auto dots = spec.find("..");
  if (dots != std::string::npos) {
    const int lo = to_int(spec.substr(0, dots));
    const int hi = to_int(spec.substr(dots + 2));
    for (int n = lo; n <= hi; ++n) out.push_back(n);
  } else {
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(to_int(tok));
  }
  if (out.empty()) throw UsageError("empty mode-order range '" + spec + "'");
  return out;
}

Observable RunConfig::observable_kind() const {
  if (observable.empty())
    return scenario == Scenario::homodyne_mc || scenario == Scenario::expt_limits ? Observable::pauli_z_plus_identity
                                                                                  : Observable::pauli_z;
  if (observable == "pauli-z") return Observable::pauli_z;
  if (observable == "pauli-z-plus-identity") return Observable::pauli_z_plus_identity;
  throw UsageError("unknown observable '" + observable + "'");
}

json RunConfig::to_json() const {
  json j;
  j["scenario"] = to_string(scenario);
  j["orders"] = orders;
  j["sigma"] = sigma;
  j["epsilon"] = epsilon;
  j["observable"] = observable_kind() == Observable::pauli_z ? "pauli-z" : "pauli-z-plus-identity";
  j["d"] = d;
  j["k"] = k;
  j["lambda0"] = lambda0;
  j["d_max"] = d_max;
  j["k_max"] = k_max;
  j["points"] = points;
  j["fd_step"] = fd_step;
  j["samples"] = samples;
  j["source_photons"] = source_photons;
  j["lo_photons"] = lo_photons;
  j["trials"] = trials;
  j["seed"] = seed ? json(*seed) : json(nullptr);
  j["confidence"] = confidence;
  j["allow_degenerate"] = allow_degenerate;
  j["noiseless"] = noiseless;
  j["format"] = format == OutputFormat::csv ? "csv" : "json";
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  c.scenario = parse_scenario(j.at("scenario").get<std::string>());
  c.orders = j.at("orders").get<std::string>();
  c.sigma = j.at("sigma").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.observable = j.at("observable").get<std::string>();
  c.d = j.at("d").get<double>();
  c.k = j.at("k").get<double>();
  c.lambda0 = j.at("lambda0").get<double>();
  c.d_max = j.at("d_max").get<double>();
  c.k_max = j.at("k_max").get<double>();
  c.points = j.at("points").get<int>();
  c.fd_step = j.at("fd_step").get<double>();
  c.samples = j.at("samples").get<std::size_t>();
  c.source_photons = j.at("source_photons").get<double>();
  c.lo_photons = j.at("lo_photons").get<double>();
  c.trials = j.at("trials").get<std::size_t>();
  if (!j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
  c.confidence = j.at("confidence").get<double>();
  c.allow_degenerate = j.at("allow_degenerate").get<bool>();
  c.noiseless = j.at("noiseless").get<bool>();
  c.format = j.at("format").get<std::string>() == "json" ? OutputFormat::json : OutputFormat::csv;
  return c;
}

ResultRecord run_qfim_scan(const RunConfig& cfg) {
  const std::vector<int> orders = parse_orders(cfg.orders);
  require_positive(cfg.sigma, "sigma");
  if (cfg.d_max < 0.0 || cfg.k_max < 0.0) throw UsageError("scan ranges must be non-negative");
  if (cfg.d_max == 0.0 && cfg.k_max == 0.0) throw UsageError("qfim-scan needs d_max or k_max");
  if (cfg.points < 1) throw UsageError("points must be at least 1");

  const Selection sel = polarization_selection(cfg.epsilon, cfg.observable_kind());
  const complex_t aw = weak_value(sel);
  ResultRecord r;
  r.scenario = Scenario::qfim_scan;
  r.config = cfg;
  r.table.columns = {"n", "d", "k", "Q_dd_analytic", "Q_dd_numeric", "Q_kk_analytic", "Q_kk_numeric"};

  std::vector<ParamVector> points;
  auto sweep = [&](double max, bool along_d) {
    if (max <= 0.0) return;
    for (int i = 0; i < cfg.points; ++i) {
      const double t = cfg.points == 1 ? 0.0 : max * i / (cfg.points - 1);
      points.push_back(along_d ? ParamVector{t, cfg.k} : ParamVector{cfg.d, t});
    }
  };
  sweep(cfg.d_max, true);
  sweep(cfg.k_max, false);

  bool warned = false;
  for (int n : orders) {
    const Grid grid = make_grid(std::max(12, n + 2), cfg.sigma, 4096);
    const StateMap map = exact_state_map(sel, n, cfg.sigma, grid);
    const FisherMatrix qa = qfim_analytic(n, cfg.sigma, aw, 1.0, 1.0);
    for (const ParamVector& g : points) {
      const NumericFisher qn = qfim_numeric(map, g, cfg.fd_step);
      warned = warned || qn.step_warning;
      r.table.rows.push_back({double(n), g.d, g.k, qa.m(0, 0), qn.fisher.m(0, 0), qa.m(1, 1), qn.fisher.m(1, 1)});
    }
  }
  r.details["weak_value"] = {aw.real(), aw.imag()};
  r.details["step_warning"] = warned;
  return r;
}

ResultRecord run_cfim_mle(const RunConfig& cfg) {
  const std::vector<int> orders = parse_orders(cfg.orders);
  require_positive(cfg.sigma, "sigma");
  const Selection sel = polarization_selection(cfg.epsilon, cfg.observable_kind());
  const complex_t aw = weak_value(sel);
  const ParamVector g0{cfg.d, cfg.k};

  ResultRecord r;
  r.scenario = Scenario::cfim_mle;
  r.config = cfg;
  r.table.columns = {"n",       "F_dd_analytic", "F_dk_analytic", "F_kk_analytic", "F_dd_numeric", "F_dk_numeric",
                     "F_kk_numeric", "Q_dd",      "Q_kk",          "tradeoff_trace", "singular"};
  for (int n : orders) {
    const Grid grid = make_grid(std::max(12, n + 2), cfg.sigma, 4096);
    const FisherMatrix fa = cfim_mle_analytic(n, cfg.sigma, aw, 1.0, 1.0);
    const FisherMatrix fn = cfim_mle_numeric(n, cfg.sigma, aw, g0, grid);
    const FisherMatrix q = qfim_analytic(n, cfg.sigma, aw, 1.0, 1.0);
    r.table.rows.push_back({double(n), fa.m(0, 0), fa.m(0, 1), fa.m(1, 1), fn.m(0, 0), fn.m(0, 1), fn.m(1, 1),
                            q.m(0, 0), q.m(1, 1), tradeoff_trace(fa, q), qcrb(fa).bounded ? 0.0 : 1.0});
  }
  r.details["weak_value"] = {aw.real(), aw.imag()};
  r.details["success_probability"] = postselect_probability(sel);
  return r;
}

ResultRecord run_ellipse(const RunConfig& cfg) {
  const std::vector<int> orders = parse_orders(cfg.orders);
  const std::uint64_t seed = require_seed(cfg);
  require_positive(cfg.sigma, "sigma");
  if (cfg.trials < 2) throw UsageError("ellipse needs at least 2 trials");
  for (int n : orders)
    if (n == 0 && !cfg.allow_degenerate)
      throw DomainError(
          "n = 0: the MLE Fisher matrix is singular (Re*Im cross term cancels the determinant), so its "
          "inverse is unbounded; pass --allow-degenerate to run anyway");

  const Selection sel = polarization_selection(cfg.epsilon, cfg.observable_kind());
  const complex_t aw = weak_value(sel);
  const double ps = postselect_probability(sel);

  ResultRecord r;
  r.scenario = Scenario::ellipse;
  r.config = cfg;
  r.table.columns = {"n",          "trials",     "C_est_dd",        "C_est_dk",        "C_est_kk",     "C_th_dd",
                     "C_th_dk",    "C_th_kk",    "mean_d_error",    "mean_k_error",    "semi_major",   "semi_minor",
                     "angle",      "est_semi_major", "est_semi_minor", "est_angle",   "pinned",       "failed",
                     "singular"};
  json per_order = json::array();
  for (int n : orders) {
    EnsembleConfig ec;
    ec.n = n;
    ec.sigma = cfg.sigma;
    ec.weak_value = aw;
    ec.success_probability = ps;
    ec.g_true = ParamVector{cfg.d, cfg.k};
    ec.samples = cfg.samples;
    ec.trials = cfg.trials;
    ec.seed = order_seed(seed, n);
    ec.confidence = cfg.confidence;
    const EnsembleResult e = run_ensemble(ec);
    const Mat2& th = e.theory_cov.m;
    r.table.rows.push_back({double(n), double(cfg.trials), e.sample_cov(0, 0), e.sample_cov(0, 1),
                            e.sample_cov(1, 1), th(0, 0), th(0, 1), th(1, 1), e.mean_error.d, e.mean_error.k,
                            e.ellipse.semi_major, e.ellipse.semi_minor, e.ellipse.angle, e.sample_ellipse.semi_major,
                            e.sample_ellipse.semi_minor, e.sample_ellipse.angle, double(e.pinned_count),
                            double(e.failed_count), e.degenerate ? 1.0 : 0.0});
    json est = json::array();
    for (const ParamVector& g : e.estimates) est.push_back({nullable(g.d), nullable(g.k)});
    json entry;
    entry["n"] = n;
    entry["C_est"] = mat_json(e.sample_cov);
    entry["C_th"] = mat_json(th);
    entry["singular"] = e.degenerate;
    if (e.degenerate)
      entry["null_direction"] = {e.theory_cov.null_direction[0], e.theory_cov.null_direction[1]};
    entry["estimates"] = std::move(est);
    per_order.push_back(std::move(entry));
  }
  r.details["weak_value"] = {aw.real(), aw.imag()};
  r.details["success_probability"] = ps;
  r.details["per_order"] = std::move(per_order);
  return r;
}

ResultRecord run_homodyne(const RunConfig& cfg) {
  const std::vector<int> orders = parse_orders(cfg.orders);
  const std::uint64_t seed = require_seed(cfg);
  require_positive(cfg.sigma, "sigma");
  require_positive(cfg.source_photons, "source_photons");
  require_positive(cfg.lo_photons, "lo_photons");
  if (cfg.trials < 100) throw UsageError("homodyne-mc needs at least 100 trials");

  const Observable obs = cfg.observable_kind();
  const Selection sel = polarization_selection(cfg.epsilon, obs);
  const complex_t aw = weak_value(sel);
  const double ps = postselect_probability(sel);
  const double signal = ps * cfg.source_photons;
  if (cfg.lo_photons < 100.0 * signal)
    throw UsageError("N_LO must be at least 100 N' (N' = P_s N = " + format_number(signal) + ")");

  ResultRecord r;
  r.scenario = Scenario::homodyne_mc;
  r.config = cfg;
  r.table.columns = {"n",          "d_true",    "k_true",    "mean_d_hat",  "mean_k_hat",  "std_d_hat",
                     "std_k_hat",  "std_delta", "std_theta", "delta_min",   "theta_min",   "ccrb_std_d",
                     "ccrb_std_k", "std_delta_over_delta_min"};
  for (int n : orders) {
    HomodyneConfig hc = HomodyneConfig::from_counts(signal, cfg.lo_photons, cfg.epsilon, n, cfg.sigma, cfg.lambda0);
    hc.observable = obs;
    const ShotNoiseStats st = shot_noise_mc(ParamVector{cfg.d, cfg.k}, hc, cfg.trials, order_seed(seed, n),
                                            cfg.noiseless ? NoiseModel::none : NoiseModel::gaussian);
    const MinDetectable lim = min_detectable(hc, cfg.source_photons);
    const auto [lo1, lo2] = splitter_lo_coefficients(n);
    const FisherMatrix f = cfim_homodyne(n, cfg.sigma, aw, lo1, lo2, cfg.source_photons, cfg.lo_photons, ps);
    const CovarianceBound bound = qcrb(f);
    r.table.rows.push_back({double(n), cfg.d, cfg.k, st.mean_d, st.mean_k, st.std_d, st.std_k, st.std_delta,
                            st.std_theta, lim.delta_min, lim.theta_min, std::sqrt(bound.m(0, 0)),
                            std::sqrt(bound.m(1, 1)), st.std_delta / lim.delta_min});
  }
  r.details["weak_value"] = {aw.real(), aw.imag()};
  r.details["success_probability"] = ps;
  r.details["signal_photons"] = signal;
  return r;
}

ResultRecord run_expt_limits(const RunConfig& cfg) {
  const std::vector<int> orders = parse_orders(cfg.orders);
  require_positive(cfg.sigma, "sigma");
  require_positive(cfg.source_photons, "source_photons");
  require_positive(cfg.lo_photons, "lo_photons");
  ResultRecord r;
  r.scenario = Scenario::expt_limits;
  r.config = cfg;
  r.table.columns = {"n", "delta_min", "theta_min", "delta_min_asymptotic", "theta_min_asymptotic"};
  for (int n : orders) {
    HomodyneConfig hc = HomodyneConfig::from_counts(0.5 * cfg.epsilon * cfg.epsilon * cfg.source_photons,
                                                    cfg.lo_photons, cfg.epsilon, n, cfg.sigma, cfg.lambda0);
    const MinDetectable m = min_detectable(hc, cfg.source_photons);
    r.table.rows.push_back({double(n), m.delta_min, m.theta_min, m.delta_asymptotic, m.theta_asymptotic});
  }
  return r;
}

ResultRecord run_scenario(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  ResultRecord r;
  switch (cfg.scenario) {
    case Scenario::qfim_scan: r = run_qfim_scan(cfg); break;
    case Scenario::cfim_mle: r = run_cfim_mle(cfg); break;
    case Scenario::ellipse: r = run_ellipse(cfg); break;
    case Scenario::homodyne_mc: r = run_homodyne(cfg); break;
    case Scenario::expt_limits: r = run_expt_limits(cfg); break;
  }
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const ResultRecord& r, std::ostream& os) {
  for (std::size_t i = 0; i < r.table.columns.size(); ++i) os << (i ? "," : "") << r.table.columns[i];
  os << '\n';
  for (const auto& row : r.table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << '\n';
  }
}

nlohmann::json to_json(const ResultRecord& r) {
  json j;
  j["tool"] = "hgwm";
  j["version"] = r.version;
  j["scenario"] = to_string(r.scenario);
  j["seed"] = r.config.seed ? json(*r.config.seed) : json(nullptr);
  j["config"] = r.config.to_json();
  j["columns"] = r.table.columns;
  json rows = json::array();
  for (const auto& row : r.table.rows) {
    json jr = json::array();
    for (double v : row) jr.push_back(nullable(v));
    rows.push_back(std::move(jr));
  }
  j["rows"] = std::move(rows);
  j["details"] = r.details;
  j["wall_time_s"] = r.wall_time_s;
  return j;
}

}  // namespace hgwm
