#pragma once

// Shadow execution: every value carries the concrete binary64 result of
// the run plus an extended-precision affine-form ideal. Comparisons and
// float->int conversions whose outcome differs (or is undecidable) between
// the two semantics are unstable sites; under SYNC the ideal follows the
// float flow, under SPLIT a flow controller schedules bounded exploration
// of the alternative flows, whole-run re-execution per flow.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fmmlab/affine.hpp"
#include "fmmlab/error.hpp"
#include "fmmlab/scalar.hpp"
#include "fmmlab/site.hpp"

namespace fmmlab {

enum class SitePolicy { SYNC, SPLIT };

enum class Tristate { yes, no, unknown };

struct ShadowConfig {
  mpfr_prec_t mantissa_bits = 319;
  int symbol_budget = 30;
  int max_paths = 4;
  int guard_budget = 8;  // CondInt alternatives per conversion site
  SitePolicy default_policy = SitePolicy::SYNC;
  std::map<std::string, SitePolicy> site_policies;
};

struct ShadowScalar {
  double f = 0.0;              // concrete IEEE execution
  MaybeAffine ideal;           // nullopt = Top
};

// One recorded branch decision of a flow.
struct Decision {
  std::string site_id;
  bool float_branch = false;
  Tristate ideal_branch = Tristate::unknown;
  int chosen = 0;       // option index actually taken (0 = float's choice)
  int option_count = 2;
};

struct CondInt {
  long base = 0;  // float semantics
  struct Alt {
    std::uint32_t guard_id;
    long value;  // ideal semantics alternative
  };
  std::vector<Alt> alternatives;

  // Any full guard assignment collapses to one integer (first true guard
  // wins, else base).
  long collapse(const std::function<bool(std::uint32_t)>& assign) const {
    for (const auto& alt : alternatives)
      if (assign(alt.guard_id)) return alt.value;
    return base;
  }
};

struct UnstableSite {
  std::string id;
  std::string where;
  std::uint64_t hits = 0;
};

// Replays a decision prefix, then defaults to the float branch while
// recording expansion points for the DFS driver.
class FlowController {
 public:
  explicit FlowController(std::vector<int> prefix)
      : prefix_(std::move(prefix)) {}

  int decide(const Site& site, bool float_branch, Tristate ideal_branch,
             int option_count) {
    int chosen = 0;
    if (next_ < prefix_.size()) {
      chosen = prefix_[next_];
      if (chosen >= option_count) chosen = 0;
    }
    ++next_;
    trace_.push_back(
        {site.id, float_branch, ideal_branch, chosen, option_count});
    return chosen;
  }

  const std::vector<Decision>& trace() const { return trace_; }
  std::size_t prefix_size() const { return prefix_.size(); }

 private:
  std::vector<int> prefix_;
  std::size_t next_ = 0;
  std::vector<Decision> trace_;
};

class ShadowContext {
 public:
  explicit ShadowContext(ShadowConfig cfg, FlowController* controller = nullptr)
      : cfg_(std::move(cfg)), controller_(controller) {
    pool_.prec = cfg_.mantissa_bits;
    pool_.budget = cfg_.symbol_budget;
  }

  static ShadowContext*& active() {
    thread_local ShadowContext* p = nullptr;
    return p;
  }

  const ShadowConfig& config() const { return cfg_; }
  SymbolPool& pool() { return pool_; }
  FlowController* controller() { return controller_; }

  SitePolicy policy(const Site& site) const {
    auto it = cfg_.site_policies.find(site.id);
    return it != cfg_.site_policies.end() ? it->second : cfg_.default_policy;
  }

  void record_unstable(const Site& site) {
    auto& entry = sites_[site.id];
    entry.id = site.id;
    entry.where = site.where;
    ++entry.hits;
  }
  void log_event(const std::string& what) { events_.push_back(what); }

  const std::map<std::string, UnstableSite>& unstable_sites() const {
    return sites_;
  }
  const std::vector<std::string>& events() const { return events_; }

 private:
  ShadowConfig cfg_;
  SymbolPool pool_;
  FlowController* controller_;
  std::map<std::string, UnstableSite> sites_;
  std::vector<std::string> events_;
};

// --- shadow arithmetic ----------------------------------------------------

ShadowScalar shadow_const(double v, ShadowContext& ctx);
ShadowScalar shadow_infinity();
bool shadow_is_infinite(const ShadowScalar& a);

ShadowScalar shadow_arith(ArithOp op, const ShadowScalar& a,
                          const ShadowScalar& b, ShadowContext& ctx);

// Relation under both semantics; returns the branch this flow takes.
bool shadow_compare(Relation rel, const ShadowScalar& a, const ShadowScalar& b,
                    const Site& site, ShadowContext& ctx);

// Float truncation plus the set of ideal alternatives; straddled integer
// boundaries become guarded alternatives, too many of them fall back to
// SYNC (base only, event logged).
CondInt shadow_truncate_to_integer(const ShadowScalar& a, const Site& site,
                                   ShadowContext& ctx);

// Resolves a CondInt to the single integer this flow uses.
long shadow_resolve_index(const CondInt& ci, const Site& site,
                          ShadowContext& ctx);

// --- bounded flow exploration --------------------------------------------

struct FlowResult {
  double cost_float = 0.0;
  // Ideal cost interval endpoints as outward doubles; empty when Top.
  std::optional<std::pair<double, double>> cost_ideal;
  int path_point_count = 0;
};

struct FlowTrace {
  std::vector<Decision> decisions;
  FlowResult result;
  bool diverged = false;
  std::string error;
};

struct ExplorationOutcome {
  std::vector<FlowTrace> flows;
  // max over explored flows of the hull distance |cost_float - cost_ideal|;
  // infinity when some flow's ideal is Top.
  double merged_error_bound = 0.0;
  std::vector<UnstableSite> unstable_sites;
  int unexplored_flows = 0;
};

using RunClosure = std::function<FlowResult(ShadowContext&)>;

ExplorationOutcome explore_flows(const RunClosure& run,
                                 const ShadowConfig& cfg);

// --- scalar contract ------------------------------------------------------

template <>
struct scalar_ops<ShadowScalar> {
  using S = ShadowScalar;
  static ShadowContext& ctx() { return *ShadowContext::active(); }
  static S from(double x) { return shadow_const(x, ctx()); }
  static S infinity() { return shadow_infinity(); }
  static bool is_infinite(const S& x) { return shadow_is_infinite(x); }
  static double approx(const S& x) { return x.f; }
  static S add(const S& a, const S& b) { return shadow_arith(ArithOp::add, a, b, ctx()); }
  static S sub(const S& a, const S& b) { return shadow_arith(ArithOp::sub, a, b, ctx()); }
  static S mul(const S& a, const S& b) { return shadow_arith(ArithOp::mul, a, b, ctx()); }
  static S div(const S& a, const S& b) { return shadow_arith(ArithOp::div, a, b, ctx()); }
  static S sqrt(const S& a) { return shadow_arith(ArithOp::sqrt, a, a, ctx()); }
  static S neg(const S& a);
  static bool less(const S& a, const S& b, const Site& site) {
    return shadow_compare(Relation::less, a, b, site, ctx());
  }
  static bool less_equal(const S& a, const S& b, const Site& site) {
    return shadow_compare(Relation::less_equal, a, b, site, ctx());
  }
  static bool equal(const S& a, const S& b, const Site& site) {
    return shadow_compare(Relation::equal, a, b, site, ctx());
  }
  static long trunc_index(const S& a, const Site& site) {
    return shadow_resolve_index(shadow_truncate_to_integer(a, site, ctx()),
                                site, ctx());
  }
};

}  // namespace fmmlab
