// fmmlab command-line front end: scenario generation, solving, precision
// audits, and refinement comparison. All randomness is behind --seed.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "fmmlab/analysis.hpp"
#include "fmmlab/backtrace.hpp"
#include "fmmlab/fmm.hpp"
#include "fmmlab/grid.hpp"

namespace {

using namespace fmmlab;

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io-error", "cannot open " + path);
  out << data;
}

int cmd_gen(const std::string& preset_name, const GenParams& params,
            std::uint64_t seed, const std::string& out) {
  Scenario s = generate_scenario(parse_preset(preset_name), params, seed);
  write_scenario_file(s, out);
  std::cout << "gen " << s.name << " " << s.grid.geom.nx << "x"
            << s.grid.geom.ny << " -> " << out << "\n";
  return 0;
}

int cmd_solve(const std::string& scenario_path, const std::string& out_path,
              const std::string& out_field, bool early_exit) {
  Scenario s = load_scenario_file(scenario_path);
  auto solved = fmm_solve<double>(s, early_exit);
  std::string summary;
  if (!out_path.empty() || !early_exit) {
    auto path = extract_path<double>(solved.field, s);
    double cost = path_cost<double>(path, s.grid);
    if (!out_path.empty()) write_file(out_path, path_to_csv(path));
    summary = "cost " + format_double(cost) + " points " +
              std::to_string(path.point_count());
  } else {
    double goal_T = solved.field.T[s.grid.geom.index(s.goal_ix, s.goal_iy)];
    summary = "goal_T " + format_double(goal_T);
  }
  if (!out_field.empty()) {
    std::vector<double> values(solved.field.T.begin(), solved.field.T.end());
    write_file(out_field, field_to_pgm(s.grid.geom, values));
  }
  std::cout << "solve " << s.name << " " << summary << "\n";
  return 0;
}

int cmd_analyze(const std::string& mode, const std::string& scenario_path,
                std::uint64_t seed, int runs, const ShadowConfig& shadow_cfg,
                const std::string& report_path) {
  Scenario s = load_scenario_file(scenario_path);
  std::string json;
  std::string summary;
  if (mode == "stochastic") {
    StochasticReport r = run_stochastic(s, seed);
    json = r.to_json();
    summary = "cost " + format_double(r.cost_mean) + " rel_err " +
              format_double(r.relative_error) + " instabilities " +
              std::to_string(r.counters.total());
  } else if (mode == "multirun") {
    MultiRunReport r = run_multirun(s, runs, seed);
    json = r.to_json();
    summary = "mean " + format_double(r.cost_mean) + " sigma " +
              format_double(r.cost_sigma) + " runs " +
              std::to_string(r.runs.size());
  } else if (mode == "shadow") {
    ShadowReport r = run_shadow(s, shadow_cfg);
    json = r.to_json();
    summary = "flows " + std::to_string(r.flows.size()) + " error_bound " +
              format_double(r.merged_error_bound) + " unstable_sites " +
              std::to_string(r.unstable_sites.size());
  } else {
    throw CLI::ValidationError("--mode", "unknown mode " + mode);
  }
  write_file(report_path, json);
  std::cout << "analyze " << mode << " " << s.name << " " << summary << "\n";
  return 0;
}

int cmd_refine(const std::string& scenario_path, int factor,
               const std::string& report_path) {
  Scenario s = load_scenario_file(scenario_path);
  RefinementReport r = compare_refinement(s, factor);
  write_file(report_path, r.to_json());
  std::cout << "refine " << s.name << " factor " << factor << " rel_diff "
            << format_double(r.relative_difference) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fast-marching minimum-cost-path solver and precision audits"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a scenario file");
  std::string preset;
  GenParams params;
  std::uint64_t seed = 0;
  std::string out_file;
  gen->add_option("--preset", preset, "uniform|obstacles|turbulence|paper-like")
      ->required();
  gen->add_option("--nx", params.nx);
  gen->add_option("--ny", params.ny);
  gen->add_option("--dx", params.dx);
  gen->add_option("--dy", params.dy);
  gen->add_option("--tau", params.tau, "base cost");
  gen->add_option("--blobs", params.blob_count);
  gen->add_option("--seed", seed)->required();
  gen->add_option("--out", out_file)->required();

  // solve
  auto* solve = app.add_subcommand("solve", "solve a scenario in plain mode");
  std::string scenario_path, out_path, out_field;
  bool early_exit = false;
  solve->add_option("--scenario", scenario_path)->required();
  solve->add_option("--out-path", out_path, "path CSV output");
  solve->add_option("--out-field", out_field, "arrival-time PGM output");
  solve->add_flag("--early-exit", early_exit);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "run a precision audit");
  std::string mode, a_scenario, report_path;
  std::uint64_t a_seed = 0;
  int runs = 10;
  ShadowConfig shadow_cfg;
  long mantissa_bits = 319;
  std::vector<std::string> sync_sites, split_sites;
  analyze->add_option("--mode", mode, "stochastic|multirun|shadow")->required();
  analyze->add_option("--scenario", a_scenario)->required();
  analyze->add_option("--seed", a_seed)->required();
  analyze->add_option("--runs", runs, "multirun ensemble size");
  analyze->add_option("--max-paths", shadow_cfg.max_paths);
  analyze->add_option("--mantissa-bits", mantissa_bits);
  analyze->add_option("--max-symbols", shadow_cfg.symbol_budget);
  analyze->add_option("--sync-site", sync_sites, "force SYNC at a site id");
  analyze->add_option("--split-site", split_sites, "force SPLIT at a site id");
  analyze->add_option("--report", report_path)->required();

  // refine
  auto* refine = app.add_subcommand("refine", "compare grid resolutions");
  std::string r_scenario, r_report;
  int factor = 2;
  refine->add_option("--scenario", r_scenario)->required();
  refine->add_option("--factor", factor)->required();
  refine->add_option("--report", r_report)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(preset, params, seed, out_file);
    if (solve->parsed())
      return cmd_solve(scenario_path, out_path, out_field, early_exit);
    if (analyze->parsed()) {
      shadow_cfg.mantissa_bits = static_cast<mpfr_prec_t>(mantissa_bits);
      for (const auto& s : sync_sites)
        shadow_cfg.site_policies[s] = SitePolicy::SYNC;
      for (const auto& s : split_sites)
        shadow_cfg.site_policies[s] = SitePolicy::SPLIT;
      return cmd_analyze(mode, a_scenario, a_seed, runs, shadow_cfg,
                         report_path);
    }
    if (refine->parsed()) return cmd_refine(r_scenario, factor, r_report);
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const fmmlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
