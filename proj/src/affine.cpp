#include "fmmlab/affine.hpp"

#include <algorithm>
#include <cmath>

namespace fmmlab {

namespace {

// Accumulates upper bounds on rounding residues; folded into one fresh
// symbol at the end of each operation.
class Slop {
 public:
  explicit Slop(mpfr_prec_t prec) : acc_(prec), prec_(prec) {}

  // `ternary` is the MPFR inexactness flag of an operation whose result is
  // `r`; an inexact correctly rounded result is within one ulp of exact.
  void fold(int ternary, const ExtFloat& r) {
    if (ternary != 0) add(r.ulp());
  }
  void add(const ExtFloat& bound) {
    mpfr_add(acc_.raw(), acc_.raw(), bound.raw(), MPFR_RNDU);
  }
  bool positive() const { return acc_.sign() > 0; }
  const ExtFloat& value() const { return acc_; }

 private:
  ExtFloat acc_;
  mpfr_prec_t prec_;
};

bool finite_form(const AffineForm& f) {
  if (!f.center.is_finite()) return false;
  for (const auto& [id, c] : f.terms)
    if (!c.is_finite()) return false;
  return true;
}

MaybeAffine finish(AffineForm f, Slop& slop, SymbolPool& pool) {
  if (slop.positive()) f.terms.emplace_back(pool.fresh(), slop.value());
  if (!finite_form(f)) return std::nullopt;
  return condense(f, pool.budget, pool);
}

}  // namespace

ExtFloat AffineForm::radius(mpfr_prec_t prec) const {
  ExtFloat r(prec);
  for (const auto& [id, c] : terms) {
    ExtFloat a = ExtFloat::abs(c);
    mpfr_add(r.raw(), r.raw(), a.raw(), MPFR_RNDU);
  }
  return r;
}

std::pair<ExtFloat, ExtFloat> AffineForm::concretize(mpfr_prec_t prec) const {
  ExtFloat rad = radius(prec);
  ExtFloat lo(prec), hi(prec);
  mpfr_sub(lo.raw(), center.raw(), rad.raw(), MPFR_RNDD);
  mpfr_add(hi.raw(), center.raw(), rad.raw(), MPFR_RNDU);
  return {std::move(lo), std::move(hi)};
}

double AffineForm::width() const {
  mpfr_prec_t p = center.prec();
  auto [lo, hi] = concretize(p);
  ExtFloat w(p);
  mpfr_sub(w.raw(), hi.raw(), lo.raw(), MPFR_RNDU);
  double d = w.to_double();
  return d;
}

AffineForm affine_const(double v, const SymbolPool& pool) {
  return AffineForm{ExtFloat(v, pool.prec), {}};
}

AffineForm affine_const(const ExtFloat& v) { return AffineForm{v, {}}; }

MaybeAffine affine_binary(AffineOp op, const AffineForm& a, const AffineForm& b,
                          SymbolPool& pool) {
  const mpfr_prec_t p = pool.prec;
  Slop slop(p);
  AffineForm r{ExtFloat(p), {}};

  if (op == AffineOp::add || op == AffineOp::sub) {
    const bool sub = op == AffineOp::sub;
    int t = sub ? mpfr_sub(r.center.raw(), a.center.raw(), b.center.raw(),
                           MPFR_RNDN)
                : mpfr_add(r.center.raw(), a.center.raw(), b.center.raw(),
                           MPFR_RNDN);
    slop.fold(t, r.center);
    // Merge term lists (both sorted by symbol id).
    std::size_t i = 0, j = 0;
    while (i < a.terms.size() || j < b.terms.size()) {
      if (j == b.terms.size() ||
          (i < a.terms.size() && a.terms[i].first < b.terms[j].first)) {
        r.terms.push_back(a.terms[i++]);
      } else if (i == a.terms.size() || b.terms[j].first < a.terms[i].first) {
        ExtFloat c = sub ? ExtFloat::neg(b.terms[j].second) : b.terms[j].second;
        r.terms.emplace_back(b.terms[j].first, std::move(c));
        ++j;
      } else {
        ExtFloat c(p);
        int tc = sub ? mpfr_sub(c.raw(), a.terms[i].second.raw(),
                                b.terms[j].second.raw(), MPFR_RNDN)
                     : mpfr_add(c.raw(), a.terms[i].second.raw(),
                                b.terms[j].second.raw(), MPFR_RNDN);
        slop.fold(tc, c);
        if (!c.is_zero()) r.terms.emplace_back(a.terms[i].first, std::move(c));
        ++i;
        ++j;
      }
    }
    return finish(std::move(r), slop, pool);
  }

  // mul: center a0*b0, linear a0*b_i + b0*a_i, one fresh symbol bounding
  // the nonlinear part by rad(a)*rad(b).
  int t = mpfr_mul(r.center.raw(), a.center.raw(), b.center.raw(), MPFR_RNDN);
  slop.fold(t, r.center);
  std::size_t i = 0, j = 0;
  while (i < a.terms.size() || j < b.terms.size()) {
    ExtFloat c(p);
    std::uint32_t id;
    if (j == b.terms.size() ||
        (i < a.terms.size() && a.terms[i].first < b.terms[j].first)) {
      id = a.terms[i].first;
      int tc = mpfr_mul(c.raw(), b.center.raw(), a.terms[i].second.raw(),
                        MPFR_RNDN);
      slop.fold(tc, c);
      ++i;
    } else if (i == a.terms.size() || b.terms[j].first < a.terms[i].first) {
      id = b.terms[j].first;
      int tc = mpfr_mul(c.raw(), a.center.raw(), b.terms[j].second.raw(),
                        MPFR_RNDN);
      slop.fold(tc, c);
      ++j;
    } else {
      id = a.terms[i].first;
      ExtFloat u(p), v(p);
      int tu = mpfr_mul(u.raw(), b.center.raw(), a.terms[i].second.raw(),
                        MPFR_RNDN);
      int tv = mpfr_mul(v.raw(), a.center.raw(), b.terms[j].second.raw(),
                        MPFR_RNDN);
      int tc = mpfr_add(c.raw(), u.raw(), v.raw(), MPFR_RNDN);
      slop.fold(tu, u);
      slop.fold(tv, v);
      slop.fold(tc, c);
      ++i;
      ++j;
    }
    if (!c.is_zero()) r.terms.emplace_back(id, std::move(c));
  }
  ExtFloat ra = a.radius(p), rb = b.radius(p);
  ExtFloat nl(p);
  mpfr_mul(nl.raw(), ra.raw(), rb.raw(), MPFR_RNDU);
  if (nl.sign() > 0) slop.add(nl);
  return finish(std::move(r), slop, pool);
}

namespace {

// Builds lambda*a + mu + delta*eps_new from min-range coefficients; the
// few roundings here are folded into delta via generous ulp bounds.
MaybeAffine linearize(const AffineForm& a, const ExtFloat& lambda,
                      const ExtFloat& mu, const ExtFloat& delta,
                      SymbolPool& pool) {
  const mpfr_prec_t p = pool.prec;
  Slop slop(p);
  slop.add(delta);
  AffineForm r{ExtFloat(p), {}};
  ExtFloat lc(p);
  int t1 = mpfr_mul(lc.raw(), lambda.raw(), a.center.raw(), MPFR_RNDN);
  slop.fold(t1, lc);
  int t2 = mpfr_add(r.center.raw(), lc.raw(), mu.raw(), MPFR_RNDN);
  slop.fold(t2, r.center);
  for (const auto& [id, c] : a.terms) {
    ExtFloat rc(p);
    int tc = mpfr_mul(rc.raw(), lambda.raw(), c.raw(), MPFR_RNDN);
    slop.fold(tc, rc);
    if (!rc.is_zero()) r.terms.emplace_back(id, std::move(rc));
  }
  return finish(std::move(r), slop, pool);
}

}  // namespace

MaybeAffine affine_inverse(const AffineForm& a, SymbolPool& pool) {
  const mpfr_prec_t p = pool.prec;
  auto [lo, hi] = a.concretize(p);
  if (!lo.is_finite() || !hi.is_finite()) return std::nullopt;
  if (lo.sign() <= 0 && hi.sign() >= 0) return std::nullopt;  // 0 in range

  if (a.terms.empty()) {
    Slop slop(p);
    AffineForm r{ExtFloat(p), {}};
    int t = mpfr_ui_div(r.center.raw(), 1, a.center.raw(), MPFR_RNDN);
    slop.fold(t, r.center);
    return finish(std::move(r), slop, pool);
  }

  // Min-range on an interval not containing 0: slope taken at the endpoint
  // of largest magnitude, where |f'| is smallest.
  ExtFloat lambda(p), rlo(p), rhi(p), mu(p), delta(p);
  const ExtFloat& far = ExtFloat::abs(hi) < ExtFloat::abs(lo) ? lo : hi;
  ExtFloat far2(p);
  mpfr_mul(far2.raw(), far.raw(), far.raw(), MPFR_RNDN);
  mpfr_si_div(lambda.raw(), -1, far2.raw(), MPFR_RNDN);

  auto residual = [&](const ExtFloat& x) {
    ExtFloat inv(p), lx(p), r(p);
    mpfr_ui_div(inv.raw(), 1, x.raw(), MPFR_RNDN);
    mpfr_mul(lx.raw(), lambda.raw(), x.raw(), MPFR_RNDN);
    mpfr_sub(r.raw(), inv.raw(), lx.raw(), MPFR_RNDN);
    return r;
  };
  rlo = residual(lo);
  rhi = residual(hi);
  ExtFloat sum(p), diff(p);
  mpfr_add(sum.raw(), rlo.raw(), rhi.raw(), MPFR_RNDN);
  mpfr_div_ui(mu.raw(), sum.raw(), 2, MPFR_RNDN);
  mpfr_sub(diff.raw(), rlo.raw(), rhi.raw(), MPFR_RNDU);
  mpfr_abs(diff.raw(), diff.raw(), MPFR_RNDU);
  mpfr_div_ui(delta.raw(), diff.raw(), 2, MPFR_RNDU);
  // Cover the handful of nearest-roundings above.
  for (const ExtFloat* x : {&rlo, &rhi, &mu, &lambda})
    if (!x->is_zero()) {
      ExtFloat u = x->ulp();
      mpfr_mul_ui(u.raw(), u.raw(), 4, MPFR_RNDU);
      mpfr_add(delta.raw(), delta.raw(), u.raw(), MPFR_RNDU);
    }
  return linearize(a, lambda, mu, delta, pool);
}

MaybeAffine affine_sqrt(const AffineForm& a, SymbolPool& pool) {
  const mpfr_prec_t p = pool.prec;
  auto [lo, hi] = a.concretize(p);
  if (!lo.is_finite() || !hi.is_finite()) return std::nullopt;
  if (lo.sign() < 0) return std::nullopt;  // possible negative argument

  if (a.terms.empty()) {
    Slop slop(p);
    AffineForm r{ExtFloat(p), {}};
    int t = mpfr_sqrt(r.center.raw(), a.center.raw(), MPFR_RNDN);
    slop.fold(t, r.center);
    return finish(std::move(r), slop, pool);
  }
  if (hi.sign() == 0) return affine_const(ExtFloat(0.0, p));

  // lambda = 1/(2*sqrt(hi)); r(x) = sqrt(x) - lambda*x is increasing on
  // [lo, hi], so mu/delta come from the endpoint residuals.
  ExtFloat shi = ExtFloat::sqrt(hi, p);
  ExtFloat lambda(p);
  ExtFloat two_shi(p);
  mpfr_mul_ui(two_shi.raw(), shi.raw(), 2, MPFR_RNDN);
  mpfr_ui_div(lambda.raw(), 1, two_shi.raw(), MPFR_RNDN);

  auto residual = [&](const ExtFloat& x) {
    ExtFloat sx = ExtFloat::sqrt(x, p);
    ExtFloat lx(p), r(p);
    mpfr_mul(lx.raw(), lambda.raw(), x.raw(), MPFR_RNDN);
    mpfr_sub(r.raw(), sx.raw(), lx.raw(), MPFR_RNDN);
    return r;
  };
  ExtFloat rlo = residual(lo), rhi = residual(hi);
  ExtFloat mu(p), delta(p), sum(p), diff(p);
  mpfr_add(sum.raw(), rlo.raw(), rhi.raw(), MPFR_RNDN);
  mpfr_div_ui(mu.raw(), sum.raw(), 2, MPFR_RNDN);
  mpfr_sub(diff.raw(), rhi.raw(), rlo.raw(), MPFR_RNDU);
  mpfr_abs(diff.raw(), diff.raw(), MPFR_RNDU);
  mpfr_div_ui(delta.raw(), diff.raw(), 2, MPFR_RNDU);
  for (const ExtFloat* x : {&rlo, &rhi, &mu, &lambda})
    if (!x->is_zero()) {
      ExtFloat u = x->ulp();
      mpfr_mul_ui(u.raw(), u.raw(), 4, MPFR_RNDU);
      mpfr_add(delta.raw(), delta.raw(), u.raw(), MPFR_RNDU);
    }
  return linearize(a, lambda, mu, delta, pool);
}

AffineForm condense(const AffineForm& a, int budget, SymbolPool& pool) {
  if (budget <= 0) budget = 1;
  if (static_cast<int>(a.terms.size()) <= budget) return a;

  const mpfr_prec_t p = pool.prec;
  std::vector<std::size_t> idx(a.terms.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    int c = mpfr_cmpabs(a.terms[x].second.raw(), a.terms[y].second.raw());
    if (c != 0) return c < 0;
    return a.terms[x].first < a.terms[y].first;  // deterministic tie-break
  });

  const std::size_t merge_count = a.terms.size() - budget + 1;
  std::vector<bool> merged(a.terms.size(), false);
  ExtFloat blob(p);
  for (std::size_t k = 0; k < merge_count; ++k) {
    merged[idx[k]] = true;
    ExtFloat c = ExtFloat::abs(a.terms[idx[k]].second);
    mpfr_add(blob.raw(), blob.raw(), c.raw(), MPFR_RNDU);
  }

  AffineForm r{a.center, {}};
  for (std::size_t k = 0; k < a.terms.size(); ++k)
    if (!merged[k]) r.terms.push_back(a.terms[k]);
  r.terms.emplace_back(pool.fresh(), std::move(blob));
  return r;
}

}  // namespace fmmlab
