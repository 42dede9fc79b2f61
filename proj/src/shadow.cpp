#include "fmmlab/shadow.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace fmmlab {

ShadowScalar shadow_const(double v, ShadowContext& ctx) {
  if (std::isinf(v)) return shadow_infinity();
  return {v, affine_const(v, ctx.pool())};
}

ShadowScalar shadow_infinity() {
  return {std::numeric_limits<double>::infinity(), std::nullopt};
}

bool shadow_is_infinite(const ShadowScalar& a) { return std::isinf(a.f); }

ShadowScalar shadow_arith(ArithOp op, const ShadowScalar& a,
                          const ShadowScalar& b, ShadowContext& ctx) {
  if (std::isnan(a.f) || (op != ArithOp::sqrt && std::isnan(b.f)))
    throw Error("invalid-operand", "NaN operand");
  ShadowScalar r;
  r.f = ieee_apply(op, a.f, b.f);
  // Infinities carry no affine ideal.
  if (std::isinf(r.f) || shadow_is_infinite(a) ||
      (op != ArithOp::sqrt && shadow_is_infinite(b))) {
    r.ideal = std::nullopt;
    return r;
  }
  const bool top = !a.ideal || (op != ArithOp::sqrt && !b.ideal);
  if (top) {
    r.ideal = std::nullopt;  // Top absorbs
    return r;
  }
  switch (op) {
    case ArithOp::add:
      r.ideal = affine_binary(AffineOp::add, *a.ideal, *b.ideal, ctx.pool());
      break;
    case ArithOp::sub:
      r.ideal = affine_binary(AffineOp::sub, *a.ideal, *b.ideal, ctx.pool());
      break;
    case ArithOp::mul:
      r.ideal = affine_binary(AffineOp::mul, *a.ideal, *b.ideal, ctx.pool());
      break;
    case ArithOp::div: {
      MaybeAffine inv = affine_inverse(*b.ideal, ctx.pool());
      if (!inv) {
        ctx.log_event("possible-division-by-zero");
        r.ideal = std::nullopt;
      } else {
        r.ideal = affine_binary(AffineOp::mul, *a.ideal, *inv, ctx.pool());
      }
      break;
    }
    case ArithOp::sqrt: {
      MaybeAffine s = affine_sqrt(*a.ideal, ctx.pool());
      if (!s) {
        ctx.log_event("possible-negative-sqrt");
        r.ideal = std::nullopt;
      } else {
        r.ideal = std::move(s);
      }
      break;
    }
  }
  return r;
}

ShadowScalar scalar_ops<ShadowScalar>::neg(const ShadowScalar& a) {
  ShadowScalar r;
  r.f = -a.f;
  if (a.ideal) {
    AffineForm f = *a.ideal;
    f.center = ExtFloat::neg(f.center);
    for (auto& [id, c] : f.terms) c = ExtFloat::neg(c);
    r.ideal = std::move(f);
  }
  return r;
}

namespace {

// Does `rel` hold for all / no points of the ideal concretizations?
Tristate ideal_relation(Relation rel, const ShadowScalar& a,
                        const ShadowScalar& b, ShadowContext& ctx) {
  if (!a.ideal || !b.ideal) return Tristate::unknown;
  MaybeAffine d =
      affine_binary(AffineOp::sub, *a.ideal, *b.ideal, ctx.pool());
  if (!d) return Tristate::unknown;
  auto [lo, hi] = d->concretize(ctx.pool().prec);
  switch (rel) {
    case Relation::less:
      if (hi.sign() < 0) return Tristate::yes;
      if (lo.sign() >= 0) return Tristate::no;
      return Tristate::unknown;
    case Relation::less_equal:
      if (hi.sign() <= 0) return Tristate::yes;
      if (lo.sign() > 0) return Tristate::no;
      return Tristate::unknown;
    case Relation::equal:
      if (lo.sign() == 0 && hi.sign() == 0) return Tristate::yes;
      if (lo.sign() > 0 || hi.sign() < 0) return Tristate::no;
      return Tristate::unknown;
  }
  return Tristate::unknown;
}

}  // namespace

bool shadow_compare(Relation rel, const ShadowScalar& a, const ShadowScalar& b,
                    const Site& site, ShadowContext& ctx) {
  bool float_branch = relation_holds(rel, a.f, b.f);
  // Infinity comparisons are concrete in both semantics.
  if (shadow_is_infinite(a) || shadow_is_infinite(b)) return float_branch;

  Tristate ideal = ideal_relation(rel, a, b, ctx);
  if (ideal == (float_branch ? Tristate::yes : Tristate::no))
    return float_branch;

  ctx.record_unstable(site);
  if (ctx.policy(site) == SitePolicy::SYNC || ctx.controller() == nullptr)
    return float_branch;
  int chosen = ctx.controller()->decide(site, float_branch, ideal, 2);
  return chosen == 0 ? float_branch : !float_branch;
}

CondInt shadow_truncate_to_integer(const ShadowScalar& a, const Site& site,
                                   ShadowContext& ctx) {
  if (!std::isfinite(a.f))
    throw Error("invalid-operand", "non-finite conversion input");
  if (a.f < 0.0)
    throw Error("negative-unsigned-conversion", "negative conversion input");
  CondInt ci;
  ci.base = static_cast<long>(a.f);
  if (!a.ideal) {
    // Top: fall back to the float value, counted as unstable.
    ctx.record_unstable(site);
    ctx.log_event(std::string("conversion-top-sync:") + site.id);
    return ci;
  }
  auto [lo, hi] = a.ideal->concretize(ctx.pool().prec);
  // Integer parts attainable over the concretization (truncation of
  // non-negative values is floor). Floor in full precision: rounding the
  // endpoints to double first would erase exactly the near-grid-line
  // cases this analysis exists to catch.
  long ilo = mpfr_get_si(lo.raw(), MPFR_RNDD);
  long ihi = mpfr_get_si(hi.raw(), MPFR_RNDD);
  if (ilo < 0) ilo = 0;
  if (ilo == ci.base && ihi == ci.base) return ci;  // inside [base, base+1)

  ctx.record_unstable(site);
  std::vector<long> alts;
  for (long v = ilo; v <= ihi; ++v)
    if (v != ci.base) alts.push_back(v);
  if (alts.empty()) alts.push_back(ilo);  // ideal entirely off-base
  if (static_cast<int>(alts.size()) > ctx.config().guard_budget) {
    ctx.log_event(std::string("conversion-guard-budget-sync:") + site.id);
    return ci;  // SYNC fallback, base only
  }
  for (long v : alts) ci.alternatives.push_back({ctx.pool().fresh(), v});
  return ci;
}

long shadow_resolve_index(const CondInt& ci, const Site& site,
                          ShadowContext& ctx) {
  if (ci.alternatives.empty()) return ci.base;
  if (ctx.policy(site) == SitePolicy::SYNC || ctx.controller() == nullptr)
    return ci.base;
  int options = static_cast<int>(ci.alternatives.size()) + 1;
  int chosen = ctx.controller()->decide(site, true, Tristate::no, options);
  return chosen == 0 ? ci.base : ci.alternatives[chosen - 1].value;
}

ExplorationOutcome explore_flows(const RunClosure& run,
                                 const ShadowConfig& cfg) {
  ExplorationOutcome out;
  std::map<std::string, UnstableSite> all_sites;
  std::deque<std::vector<int>> pending;
  pending.push_back({});

  while (!pending.empty() &&
         static_cast<int>(out.flows.size()) < cfg.max_paths) {
    std::vector<int> prefix = pending.front();
    pending.pop_front();

    FlowController controller(prefix);
    ShadowContext ctx(cfg, &controller);
    FlowTrace trace;
    try {
      trace.result = run(ctx);
    } catch (const Error& e) {
      trace.diverged = true;
      trace.error = e.name();
    }
    trace.decisions = controller.trace();
    for (const auto& [id, s] : ctx.unstable_sites()) {
      auto& agg = all_sites[id];
      agg.id = s.id;
      agg.where = s.where;
      agg.hits += s.hits;
    }

    // Schedule the untaken options of the decisions this flow appended
    // beyond its prefix (DFS order: deepest first).
    const auto& decisions = trace.decisions;
    for (std::size_t i = decisions.size(); i-- > controller.prefix_size();) {
      for (int o = 1; o < decisions[i].option_count; ++o) {
        std::vector<int> child;
        child.reserve(i + 1);
        for (std::size_t k = 0; k < i; ++k) child.push_back(decisions[k].chosen);
        child.push_back(o);
        pending.push_front(child);
      }
    }
    out.flows.push_back(std::move(trace));
  }
  out.unexplored_flows = static_cast<int>(pending.size());

  double merged = 0.0;
  for (const auto& flow : out.flows) {
    if (flow.diverged) continue;
    if (!flow.result.cost_ideal) {
      merged = std::numeric_limits<double>::infinity();
      break;
    }
    auto [lo, hi] = *flow.result.cost_ideal;
    double d = std::max(std::fabs(flow.result.cost_float - lo),
                        std::fabs(flow.result.cost_float - hi));
    merged = std::max(merged, d);
  }
  out.merged_error_bound = merged;
  for (auto& [id, s] : all_sites) out.unstable_sites.push_back(s);
  return out;
}

}  // namespace fmmlab
