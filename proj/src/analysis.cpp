#include "fmmlab/analysis.hpp"

#include <cmath>
#include <json.hpp>

#include "fmmlab/backtrace.hpp"
#include "fmmlab/fmm.hpp"

namespace fmmlab {

using ordered_json = nlohmann::ordered_json;

namespace {

double sample_sigma(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : xs) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

ordered_json counters_json(const InstabilityCounters& c) {
  return ordered_json{{"unstable_branching", c.unstable_branching},
                      {"cancellation", c.cancellation},
                      {"unstable_multiplication", c.unstable_multiplication},
                      {"unstable_conversion", c.unstable_conversion}};
}

}  // namespace

PlainRunResult run_plain(const Scenario& scenario) {
  auto solved = fmm_solve<double>(scenario);
  auto path = extract_path<double>(solved.field, scenario);
  PlainRunResult r;
  r.cost = path_cost<double>(path, scenario.grid);
  r.goal_T =
      solved.field.T[scenario.grid.geom.index(scenario.goal_ix, scenario.goal_iy)];
  r.path_point_count = path.point_count();
  r.path_points = path.approx_points();
  return r;
}

StochasticReport run_stochastic(const Scenario& scenario, std::uint64_t seed,
                                bool perturb) {
  StContext ctx;
  ctx.rng = RngStream{seed};
  ctx.perturb = perturb;
  ScopedContext<StContext> guard(ctx);

  StochasticReport r;
  r.scenario_name = scenario.name;
  r.seed = seed;
  try {
    auto solved = fmm_solve<StochasticTriple>(scenario);
    auto path = extract_path<StochasticTriple>(solved.field, scenario);
    StochasticTriple cost = path_cost<StochasticTriple>(path, scenario.grid);
    r.cost_mean = cost.mean();
    r.cost_sigma = cost.sigma();
    r.relative_error =
        r.cost_mean == 0.0 ? 0.0 : r.cost_sigma / std::fabs(r.cost_mean);
    r.significant_digits = significant_digits(cost);
    r.path_point_count = path.point_count();
  } catch (const Error& e) {
    r.counters = ctx.counters;
    throw Error(e.name(), std::string(e.what()) + " (after " +
                              std::to_string(ctx.counters.total()) +
                              " instabilities)");
  }
  r.counters = ctx.counters;
  return r;
}

MultiRunReport run_multirun(const Scenario& scenario, int n,
                            std::uint64_t seed, bool perturb) {
  if (n < 2) throw Error("need-at-least-2-runs", "n must be >= 2");
  MultiRunReport r;
  r.scenario_name = scenario.name;
  r.seed = seed;

  PlainRunResult ref = run_plain(scenario);
  r.reference_cost = ref.cost;
  r.reference_point_count = ref.path_point_count;

  std::vector<double> costs;
  for (int i = 0; i < n; ++i) {
    MultiRunReport::Run run;
    run.seed = RngStream::child_seed(seed, static_cast<std::uint64_t>(i));
    RrContext ctx;
    ctx.rng = RngStream{run.seed};
    ctx.perturb = perturb;
    ScopedContext<RrContext> guard(ctx);
    try {
      auto solved = fmm_solve<RandomRoundScalar>(scenario);
      auto path = extract_path<RandomRoundScalar>(solved.field, scenario);
      run.cost = path_cost<RandomRoundScalar>(path, scenario.grid).v;
      run.path_point_count = path.point_count();
      costs.push_back(run.cost);
    } catch (const Error& e) {
      run.cost = 0.0;
      run.path_point_count = 0;
      run.error = e.name();
    }
    r.runs.push_back(run);
  }
  if (!costs.empty()) {
    double sum = 0.0;
    for (double c : costs) sum += c;
    r.cost_mean = sum / static_cast<double>(costs.size());
    r.cost_sigma = sample_sigma(costs, r.cost_mean);
  }
  r.reference_within_4_sigma =
      std::fabs(r.reference_cost - r.cost_mean) <= 4.0 * r.cost_sigma;
  return r;
}

ShadowReport run_shadow(const Scenario& scenario, const ShadowConfig& config) {
  auto closure = [&scenario](ShadowContext& ctx) -> FlowResult {
    ScopedContext<ShadowContext> guard(ctx);
    auto solved = fmm_solve<ShadowScalar>(scenario);
    auto path = extract_path<ShadowScalar>(solved.field, scenario);
    ShadowScalar cost = path_cost<ShadowScalar>(path, scenario.grid);
    FlowResult fr;
    fr.cost_float = cost.f;
    if (cost.ideal) {
      auto [lo, hi] = cost.ideal->concretize(ctx.pool().prec);
      ExtFloat l = lo, h = hi;
      mpfr_prec_round(l.raw(), 53, MPFR_RNDD);
      mpfr_prec_round(h.raw(), 53, MPFR_RNDU);
      fr.cost_ideal = {l.to_double(), h.to_double()};
    }
    fr.path_point_count = path.point_count();
    return fr;
  };

  ExplorationOutcome out = explore_flows(closure, config);
  bool any_ok = false;
  for (const auto& f : out.flows)
    if (!f.diverged) any_ok = true;
  if (!any_ok) throw Error("shadow-analysis-failed", "all flows diverged");

  ShadowReport r;
  r.scenario_name = scenario.name;
  r.config = config;
  r.flows = std::move(out.flows);
  r.merged_error_bound = out.merged_error_bound;
  r.unstable_sites = std::move(out.unstable_sites);
  r.unexplored_flows = out.unexplored_flows;
  return r;
}

Scenario refine_scenario(const Scenario& scenario, int factor) {
  if (factor != 2 && factor != 4)
    throw Error("invalid-factor", "factor must be 2 or 4");
  const auto& g = scenario.grid.geom;
  Scenario fine;
  fine.name = scenario.name + "-x" + std::to_string(factor);
  fine.grid.geom = GridGeometry{(g.nx - 1) * factor + 1, (g.ny - 1) * factor + 1,
                                g.x_min, g.y_min, g.dx / factor, g.dy / factor};
  const auto& fg = fine.grid.geom;
  fine.grid.tau.resize(fg.node_count());
  for (int iy = 0; iy < fg.ny; ++iy)
    for (int ix = 0; ix < fg.nx; ++ix) {
      double x = std::min(fg.x_at(ix), g.x_max());
      double y = std::min(fg.y_at(iy), g.y_max());
      fine.grid.tau[fg.index(ix, iy)] = tau_at(scenario.grid, x, y);
    }
  fine.start_ix = scenario.start_ix * factor;
  fine.start_iy = scenario.start_iy * factor;
  fine.goal_ix = scenario.goal_ix * factor;
  fine.goal_iy = scenario.goal_iy * factor;
  fine.validate();
  return fine;
}

RefinementReport compare_refinement(const Scenario& scenario, int factor) {
  Scenario fine = refine_scenario(scenario, factor);
  PlainRunResult coarse = run_plain(scenario);
  PlainRunResult refined = run_plain(fine);

  RefinementReport r;
  r.scenario_name = scenario.name;
  r.factor = factor;
  r.resolutions.push_back({scenario.grid.geom.nx, scenario.grid.geom.ny,
                           coarse.cost, coarse.path_point_count});
  r.resolutions.push_back({fine.grid.geom.nx, fine.grid.geom.ny, refined.cost,
                           refined.path_point_count});
  double denom = std::max(std::fabs(coarse.cost), std::fabs(refined.cost));
  r.relative_difference =
      denom == 0.0 ? 0.0 : std::fabs(coarse.cost - refined.cost) / denom;
  return r;
}

// --- serialization --------------------------------------------------------

std::string StochasticReport::to_json() const {
  ordered_json j{{"mode", "stochastic"},
                 {"scenario_name", scenario_name},
                 {"seed", seed},
                 {"cost",
                  {{"mean", cost_mean},
                   {"sigma", cost_sigma},
                   {"relative_error", relative_error},
                   {"significant_digits", significant_digits}}},
                 {"path", {{"point_count", path_point_count}}},
                 {"counters", counters_json(counters)}};
  return j.dump(2) + "\n";
}

std::string MultiRunReport::to_json() const {
  ordered_json jruns = ordered_json::array();
  for (const auto& run : runs) {
    ordered_json jr{{"seed", run.seed},
                    {"cost", run.cost},
                    {"point_count", run.path_point_count}};
    if (!run.error.empty()) jr["error"] = run.error;
    jruns.push_back(jr);
  }
  ordered_json j{{"mode", "multirun"},
                 {"scenario_name", scenario_name},
                 {"seed", seed},
                 {"cost",
                  {{"mean", cost_mean},
                   {"sigma", cost_sigma},
                   {"reference", reference_cost},
                   {"reference_within_4_sigma", reference_within_4_sigma}}},
                 {"path", {{"reference_point_count", reference_point_count}}},
                 {"runs", jruns}};
  return j.dump(2) + "\n";
}

std::string ShadowReport::to_json() const {
  ordered_json jflows = ordered_json::array();
  for (const auto& f : flows) {
    ordered_json jf;
    jf["diverged"] = f.diverged;
    if (f.diverged) {
      jf["error"] = f.error;
    } else {
      jf["cost_float"] = f.result.cost_float;
      if (f.result.cost_ideal)
        jf["cost_ideal"] = {f.result.cost_ideal->first,
                            f.result.cost_ideal->second};
      else
        jf["cost_ideal"] = "top";
      jf["point_count"] = f.result.path_point_count;
    }
    ordered_json jdec = ordered_json::array();
    for (const auto& d : f.decisions)
      jdec.push_back({{"site", d.site_id}, {"chosen", d.chosen}});
    jf["decisions"] = jdec;
    jflows.push_back(jf);
  }
  ordered_json jsites = ordered_json::array();
  for (const auto& s : unstable_sites)
    jsites.push_back(
        {{"site", s.id}, {"where", s.where}, {"hits", s.hits}});
  double cost = 0.0;
  for (const auto& f : flows)
    if (!f.diverged) {
      cost = f.result.cost_float;
      break;
    }
  ordered_json j{{"mode", "shadow"},
                 {"scenario_name", scenario_name},
                 {"seed", 0},
                 {"cost", cost},
                 {"flows", jflows},
                 {"unstable_sites", jsites},
                 {"error_bound",
                  std::isinf(merged_error_bound) ? ordered_json("top")
                                                 : ordered_json(merged_error_bound)},
                 {"mantissa_bits", static_cast<std::int64_t>(config.mantissa_bits)},
                 {"symbol_budget", config.symbol_budget},
                 {"max_paths", config.max_paths},
                 {"unexplored_flows", unexplored_flows}};
  return j.dump(2) + "\n";
}

std::string RefinementReport::to_json() const {
  ordered_json jres = ordered_json::array();
  for (const auto& lvl : resolutions)
    jres.push_back({{"nx", lvl.nx},
                    {"ny", lvl.ny},
                    {"cost", lvl.cost},
                    {"point_count", lvl.path_point_count}});
  ordered_json j{{"mode", "refine"},
                 {"scenario_name", scenario_name},
                 {"factor", factor},
                 {"resolutions", jres},
                 {"relative_difference", relative_difference}};
  return j.dump(2) + "\n";
}

}  // namespace fmmlab
