// opo-sim: positive-P simulation of the parametric oscillator below threshold.
//
//   opo-sim run     [--config PATH] [--mu ..] [--gamma-r ..] ...   report.json + running.csv
//   opo-sim sweep   --axis gamma_r|mu --values v1,v2,.. [--mode analytic|montecarlo|both]   sweep.csv
//   opo-sim compare [...]                                          compare.csv + compare.json
//
// Exit codes: 0 ok, 2 invalid input, 3 unreliable run (too many diverged trajectories).

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "opo/analytic.hpp"
#include "opo/criteria.hpp"
#include "opo/ensemble.hpp"
#include "opo/report.hpp"
#include "opo/run_spec.hpp"

namespace {

using namespace opo;
using report::json;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitUnreliable = 3;

constexpr double kReferenceCoupling = 0.0071;

struct CommonOptions {
  std::string config_path;
  std::map<std::string, std::string> values;  // raw flag values by config key
  std::map<std::string, CLI::Option*> options;
  bool reference_params = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value configuration file");
    for (const auto& key : config_keys()) {
      std::string names = "--" + kebab(key.name);
      if (std::string(key.name) == "master_seed") names += ",--seed";
      options[key.name] = app->add_option(names, values[key.name], key.help);
    }
    app->add_flag("--reference-params", reference_params, "use the reference coupling g = 0.0071 unless --g is given");
  }

  RunSpec build() const {
    std::map<std::string, std::string> flags;
    for (const auto& [name, opt] : options)
      if (opt->count() > 0) flags[name] = values.at(name);
    const auto config = config_path.empty() ? std::map<std::string, std::string>{} : read_config_file(config_path);
    RunSpec spec = build_run_spec(config, flags);
    if (reference_params && !flags.count("g") && !config.count("g")) spec.g = kReferenceCoupling;
    return spec;
  }
};

std::filesystem::path prepare_out_dir(const RunSpec& spec) {
  std::filesystem::path dir(spec.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

json provenance(const RunSpec& spec, const SimConfig& c, const std::string& command) {
  return {{"version", report::kVersion},
          {"command", command},
          {"params", report::to_json(spec.params())},
          {"sim_config", report::to_json(c)},
          {"n_batches", spec.n_batches},
          {"sigma_threshold", spec.sigma_threshold}};
}

json ensemble_json(const EnsembleResult& r) {
  return {{"n_trajectories", r.n_trajectories}, {"diverged", r.diverged},
          {"diverged_fraction", r.diverged_fraction()}, {"discarded_steps", r.discarded_steps},
          {"unreliable", r.unreliable}, {"workers", r.workers}, {"wall_seconds", r.wall_seconds}};
}

void print_cs(const criteria::CriterionReport& cs) {
  if (cs.no_signal) {
    std::printf("%s: no signal\n", cs.name.c_str());
    return;
  }
  std::printf("%s: lhs %.6e +- %.2e  rhs %.6e +- %.2e  ratio %.4f +- %.4f  (%.2f sigma) -> %s\n",
              cs.name.c_str(), cs.lhs_quadrature.value_or(cs.lhs), cs.lhs_err / (cs.lhs != 0 ? cs.lhs : 1) *
                                                                         cs.lhs_quadrature.value_or(cs.lhs),
              cs.rhs_quadrature.value_or(cs.rhs), cs.rhs_err / (cs.rhs != 0 ? cs.rhs : 1) * cs.rhs_quadrature.value_or(cs.rhs),
              cs.ratio, cs.ratio_err, cs.significance, criteria::to_string(cs.verdict));
}

int cmd_run(const RunSpec& spec) {
  const ModelParams p = spec.params();
  const SimConfig c = spec.sim_config();
  const auto dir = prepare_out_dir(spec);
  const EnsembleResult r = run_ensemble(p, c, spec.ensemble_options());

  json rep = provenance(spec, c, "run");
  rep["ensemble"] = ensemble_json(r);
  rep["analytic"] = report::analytic_json(p);
  try {
    const MomentReport m = finalize(r.moments);
    rep["moments"] = report::to_json(m);
    rep["criteria"] = report::criteria_json(m, spec.sigma_threshold);
    print_cs(criteria::cs_test(m, criteria::Partition::kPump, {spec.sigma_threshold, true}));
    if (const auto pv = criteria::pump_phase_variance(m); !pv.negligible)
      warn(pv.message + " (ratio " + std::to_string(pv.ratio) + "); closed-form lhs omits it");
  } catch (const std::runtime_error& e) {
    rep["moments"] = nullptr;
    rep["error"] = e.what();
    std::cerr << "error: " << e.what() << '\n';
  }
  write_text(dir / "report.json", rep.dump(2) + "\n");
  std::ostringstream csv;
  report::write_running_csv(csv, report::running_averages(r));
  write_text(dir / "running.csv", csv.str());
  std::printf("wrote %s and %s (%lld trajectories, %lld diverged, %.2f s)\n", (dir / "report.json").string().c_str(),
              (dir / "running.csv").string().c_str(), static_cast<long long>(r.n_trajectories),
              static_cast<long long>(r.diverged), r.wall_seconds);
  if (r.unreliable || !rep.contains("criteria")) {
    std::cerr << "error: unreliable run: " << r.diverged << " of " << r.n_trajectories << " trajectories diverged\n";
    return kExitUnreliable;
  }
  return kExitOk;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = detail::trim(item);
    if (item.empty()) continue;
    out.push_back(detail::parse_number<double>("values", item));
  }
  return out;
}

int cmd_sweep(const RunSpec& base, const std::string& axis, const std::string& values_text, const std::string& mode) {
  if (axis != "gamma_r" && axis != "mu") throw ConfigError("--axis must be gamma_r or mu");
  if (mode != "analytic" && mode != "montecarlo" && mode != "both")
    throw ConfigError("--mode must be analytic, montecarlo or both");
  std::vector<double> values = parse_values(values_text);
  if (values.empty()) throw ConfigError("sweep needs at least one value (--values)");
  std::vector<double> unique;
  for (double v : values)
    if (std::find(unique.begin(), unique.end(), v) == unique.end()) unique.push_back(v);
  if (unique.size() != values.size())
    warn("sweep: dropped " + std::to_string(values.size() - unique.size()) + " duplicate value(s)");

  std::vector<report::SweepRow> rows;
  bool unreliable = false;
  for (double v : unique) {
    RunSpec spec = base;
    (axis == "mu" ? spec.mu : spec.gamma_r) = v;
    const ModelParams p = spec.params();
    if (!p.below_threshold()) throw ConfigError("above threshold unsupported (mu must be < 1)");
    if (mode != "montecarlo") rows.push_back(report::analytic_sweep_row(p));
    if (mode != "analytic") {
      const SimConfig c = spec.sim_config();
      const EnsembleResult r = run_ensemble(p, c, spec.ensemble_options());
      unreliable = unreliable || r.unreliable;
      const MomentReport m = finalize(r.moments);
      rows.push_back(report::montecarlo_sweep_row(p, criteria::cs_test(m, criteria::Partition::kPump,
                                                                        {spec.sigma_threshold, true})));
    }
  }
  const auto dir = prepare_out_dir(base);
  std::ostringstream csv;
  report::write_sweep_csv(csv, rows);
  write_text(dir / "sweep.csv", csv.str());
  std::cout << csv.str();
  return unreliable ? kExitUnreliable : kExitOk;
}

int cmd_compare(const RunSpec& spec) {
  const ModelParams p = spec.params();
  const SimConfig c = spec.sim_config();
  if (p.mu() > analytic::kNearThreshold) warn("near-threshold: perturbative oracle unreliable");
  const auto dir = prepare_out_dir(spec);
  const EnsembleResult r = run_ensemble(p, c, spec.ensemble_options());
  const MomentReport m = finalize(r.moments);
  const auto rows = report::compare_rows(m, spec.sigma_threshold);

  std::ostringstream csv;
  report::write_compare_csv(csv, rows);
  write_text(dir / "compare.csv", csv.str());
  json out = provenance(spec, c, "compare");
  out["ensemble"] = ensemble_json(r);
  out["rows"] = report::to_json(rows);
  const bool all_pass = std::all_of(rows.begin(), rows.end(), [](const auto& row) { return row.pass; });
  out["summary"] = all_pass ? "pass" : "fail";
  out["low_confidence"] = m.low_confidence;
  write_text(dir / "compare.json", out.dump(2) + "\n");

  std::printf("%-6s %14s %11s %14s %8s %14s %8s\n", "moment", "monte carlo", "std err", "closed form", "pull",
              "gauss closure", "pull");
  for (const auto& row : rows)
    std::printf("%-6s %14.6e %11.3e %14.6e %8.2f %14.6e %8.2f%s\n", row.moment.c_str(), row.mc, row.mc_err,
                row.analytic, row.pull, row.closure, row.closure_pull, row.low_confidence ? "  (low confidence)" : "");
  std::printf("summary: %s (|pull| <= %.1f against the closed forms)\n", all_pass ? "pass" : "fail",
              spec.sigma_threshold);
  if (m.low_confidence)
    warn("fewer than " + std::to_string(kMinConfidentBatches) + " batches: standard errors are low-confidence");
  return r.unreliable ? kExitUnreliable : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive-P simulation and Cauchy-Schwarz analysis of a parametric oscillator below threshold"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(opo::report::kVersion));

  auto* run = app.add_subcommand("run", "simulate and write report.json + running.csv");
  CommonOptions run_opts;
  run_opts.attach(run);

  auto* sweep = app.add_subcommand("sweep", "Cauchy-Schwarz sides over a gamma_r or mu list");
  CommonOptions sweep_opts;
  sweep_opts.attach(sweep);
  std::string axis = "gamma_r", values, mode = "analytic";
  sweep->add_option("--axis", axis, "gamma_r or mu");
  sweep->add_option("--values", values, "comma-separated axis values");
  sweep->add_option("--mode", mode, "analytic, montecarlo or both");

  auto* compare = app.add_subcommand("compare", "Monte Carlo moments against the closed-form predictions");
  CommonOptions compare_opts;
  compare_opts.attach(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts.build());
    if (sweep->parsed()) return cmd_sweep(sweep_opts.build(), axis, values, mode);
    if (compare->parsed()) return cmd_compare(compare_opts.build());
  } catch (const opo::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
