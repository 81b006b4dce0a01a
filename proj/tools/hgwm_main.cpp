// hgwm: command-line front end for the weak-measurement simulations.
//
// Precedence: built-in defaults < --config file < command-line flags.
// HGWM_OUTPUT_DIR, when set, prefixes relative --out paths.
#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "hgwm/errors.hpp"
#include "hgwm/scenarios.hpp"

namespace {

using hgwm::OutputFormat;
using hgwm::RunConfig;
using hgwm::Scenario;

enum Exit { ok = 0, usage = 2, domain = 3, numerical = 4 };

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--seed", cfg.seed, "master RNG seed (u64)");
  sub->add_option("--out", cfg.out_path, "output file (stdout if omitted)");
  sub->add_option("--format", cfg.format, "csv or json")
      ->transform(CLI::CheckedTransformer(std::map<std::string, OutputFormat>{{"csv", OutputFormat::csv},
                                                                              {"json", OutputFormat::json}},
                                          CLI::ignore_case));
  sub->add_option("--orders", cfg.orders, "mode orders, 'a..b' or '1,3,5'")->capture_default_str();
  sub->add_option("--sigma", cfg.sigma, "beam waist sigma")->capture_default_str();
  sub->add_option("--epsilon", cfg.epsilon, "post-selection angle")->capture_default_str();
  sub->add_option("--observable", cfg.observable,
                  "pauli-z or pauli-z-plus-identity (default: pauli-z-plus-identity for homodyne-mc, "
                  "pauli-z otherwise)")
      ->check(CLI::IsMember({"pauli-z", "pauli-z-plus-identity"}));
  sub->add_option("-d,--d", cfg.d, "true displacement d")->capture_default_str();
  sub->add_option("-k,--k", cfg.k, "true momentum kick k")->capture_default_str();
}

std::filesystem::path resolve_out(const std::string& out) {
  std::filesystem::path p(out);
  if (const char* dir = std::getenv("HGWM_OUTPUT_DIR"); dir && *dir && p.is_relative())
    p = std::filesystem::path(dir) / p;
  return p;
}

void emit(const hgwm::ResultRecord& rec, const RunConfig& cfg) {
  auto write = [&](std::ostream& os) {
    if (cfg.format == OutputFormat::json)
      os << hgwm::to_json(rec).dump(2) << '\n';
    else
      hgwm::write_csv(rec, os);
  };
  if (cfg.out_path.empty()) {
    write(std::cout);
    return;
  }
  const auto path = resolve_out(cfg.out_path);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw hgwm::UsageError("cannot open output file " + path.string());
  write(f);
}

void warn_first_order(const RunConfig& cfg) {
  const hgwm::ParamVector g{cfg.d, cfg.k};
  if (hgwm::first_order_validity(g, cfg.sigma) == hgwm::FirstOrderValidity::warn)
    std::cerr << "hgwm: warning: max(|d|/sigma, |k| sigma) exceeds 0.01; first-order results lose accuracy\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hermite-Gaussian pointer weak measurement of (d, k)"};
  app.set_version_flag("--version", std::string(hgwm::kToolVersion));
  app.require_subcommand(1);
  // --config is accepted after the subcommand name too; keys live in a
  // [<subcommand>] section of the file
  app.fallthrough();
  app.set_config("--config", "", "INI file with one [subcommand] section per scenario");

  app.allow_config_extras(CLI::config_extras_mode::error);

  // one config per subcommand so sections for other scenarios cannot leak in
  std::array<RunConfig, 6> cfgs;
  std::string replay_path;

  auto* qfim = app.add_subcommand("qfim-scan", "quantum Fisher information along d and k sweeps");
  RunConfig& qc = cfgs[0];
  add_common(qfim, qc);
  qfim->add_option("--d-max", qc.d_max, "upper end of the d sweep")->capture_default_str();
  qfim->add_option("--k-max", qc.k_max, "upper end of the k sweep")->capture_default_str();
  qfim->add_option("--points", qc.points, "points per sweep")->capture_default_str();
  qfim->add_option("--fd-step", qc.fd_step, "relative finite-difference step")->capture_default_str();

  auto* cfim = app.add_subcommand("cfim-mle", "classical Fisher information of position counting");
  add_common(cfim, cfgs[1]);

  auto* ell = app.add_subcommand("ellipse", "MLE ensemble and error ellipses");
  RunConfig& ec = cfgs[2];
  add_common(ell, ec);
  ell->add_option("--samples", ec.samples, "post-selected photons per trial (N')")->capture_default_str();
  ell->add_option("--trials", ec.trials, "number of trials")->capture_default_str();
  ell->add_option("--confidence", ec.confidence, "ellipse confidence level")->capture_default_str();
  ell->add_flag("--allow-degenerate", ec.allow_degenerate, "permit n = 0 (singular Fisher matrix)");

  auto* hom = app.add_subcommand("homodyne-mc", "dual homodyne shot-noise Monte Carlo");
  RunConfig& hc = cfgs[3];
  add_common(hom, hc);
  hom->add_option("--source-photons", hc.source_photons, "photons before post-selection (N)")
      ->capture_default_str();
  hom->add_option("--lo-photons", hc.lo_photons, "local oscillator photons (N_LO)")->capture_default_str();
  hom->add_option("--trials", hc.trials, "number of trials")->capture_default_str();
  hom->add_option("--lambda0", hc.lambda0, "wavelength for the tilt conversion")->capture_default_str();
  hom->add_flag("--noiseless", hc.noiseless, "disable shot noise");

  auto* lim = app.add_subcommand("expt-limits", "minimal detectable displacement and tilt");
  RunConfig& lc = cfgs[4];
  add_common(lim, lc);
  lim->add_option("--source-photons", lc.source_photons, "photons before post-selection (N)")
      ->capture_default_str();
  lim->add_option("--lo-photons", lc.lo_photons, "local oscillator photons (N_LO)")->capture_default_str();
  lim->add_option("--lambda0", lc.lambda0, "wavelength for the tilt conversion")->capture_default_str();

  auto* rep = app.add_subcommand("replay", "re-run the config embedded in a JSON result record");
  rep->add_option("record", replay_path, "JSON record")->required();
  rep->add_option("--out", cfgs[5].out_path, "output file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::usage;
  }

  const std::array<std::pair<CLI::App*, Scenario>, 5> subs{{{qfim, Scenario::qfim_scan},
                                                            {cfim, Scenario::cfim_mle},
                                                            {ell, Scenario::ellipse},
                                                            {hom, Scenario::homodyne_mc},
                                                            {lim, Scenario::expt_limits}}};
  CLI::App* invoked = app.get_subcommands().front();
  RunConfig cfg;
  try {
    if (invoked == rep) {
      std::ifstream f(replay_path);
      if (!f) throw hgwm::UsageError("cannot read " + replay_path);
      const auto record = nlohmann::json::parse(f);
      cfg = RunConfig::from_json(record.at("config"));
      cfg.out_path = cfgs[5].out_path;
      cfg.format = OutputFormat::json;
    } else {
      for (std::size_t i = 0; i < subs.size(); ++i)
        if (subs[i].first == invoked) {
          cfg = cfgs[i];
          cfg.scenario = subs[i].second;
        }
    }
    warn_first_order(cfg);
    emit(hgwm::run_scenario(cfg), cfg);
  } catch (const hgwm::UsageError& e) {
    std::cerr << "hgwm: usage error: " << e.what() << '\n';
    return Exit::usage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "hgwm: usage error: bad record: " << e.what() << '\n';
    return Exit::usage;
  } catch (const hgwm::DomainError& e) {
    std::cerr << "hgwm: " << e.what() << '\n';
    return Exit::domain;
  } catch (const hgwm::NumericalError& e) {
    std::cerr << "hgwm: numerical failure: " << e.what() << '\n';
    return Exit::numerical;
  } catch (const std::exception& e) {
    std::cerr << "hgwm: " << e.what() << '\n';
    return Exit::numerical;
  }
  return Exit::ok;
}
