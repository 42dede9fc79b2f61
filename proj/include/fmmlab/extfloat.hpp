#pragma once

// Software floating point with a configurable mantissa width (default 319
// bits), backed by MPFR. All operations are correctly rounded at the
// requested precision. This is the coefficient arithmetic for affine forms
// and the scalar type of the high-precision oracle.

#include <mpfr.h>

#include <string>

namespace fmmlab {

class ExtFloat {
 public:
  static constexpr mpfr_prec_t kDefaultPrec = 319;

  explicit ExtFloat(mpfr_prec_t prec = kDefaultPrec) {
    mpfr_init2(v_, prec);
    mpfr_set_zero(v_, 1);
  }
  ExtFloat(double d, mpfr_prec_t prec) {
    mpfr_init2(v_, prec);
    mpfr_set_d(v_, d, MPFR_RNDN);
  }
  ExtFloat(const ExtFloat& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  ExtFloat(ExtFloat&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }
  ExtFloat& operator=(const ExtFloat& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  ExtFloat& operator=(ExtFloat&& o) noexcept {
    if (this != &o) mpfr_swap(v_, o.v_);
    return *this;
  }
  ~ExtFloat() { mpfr_clear(v_); }

  mpfr_prec_t prec() const { return mpfr_get_prec(v_); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }
  int cmp(const ExtFloat& o) const { return mpfr_cmp(v_, o.v_); }
  int cmp(double d) const { return mpfr_cmp_d(v_, d); }
  bool operator<(const ExtFloat& o) const { return cmp(o) < 0; }
  bool operator==(const ExtFloat& o) const { return cmp(o) == 0; }

  std::string str() const {
    char* s = nullptr;
    mpfr_asprintf(&s, "%.6Re", v_);
    std::string r(s);
    mpfr_free_str(s);
    return r;
  }

  // One unit in the last place at this value's exponent, as an upper bound
  // on the rounding error of a correctly rounded operation that produced
  // this value.
  ExtFloat ulp() const {
    ExtFloat r(prec());
    if (is_zero() || !is_finite()) {
      mpfr_set_zero(r.v_, 1);
      return r;
    }
    mpfr_set_ui_2exp(r.v_, 1, mpfr_get_exp(v_) - prec(), MPFR_RNDU);
    return r;
  }

  // Binary ops at explicit result precision; rnd defaults to nearest.
  static ExtFloat add(const ExtFloat& a, const ExtFloat& b, mpfr_prec_t p,
                      mpfr_rnd_t rnd = MPFR_RNDN) {
    ExtFloat r(p);
    mpfr_add(r.v_, a.v_, b.v_, rnd);
    return r;
  }
  static ExtFloat sub(const ExtFloat& a, const ExtFloat& b, mpfr_prec_t p,
                      mpfr_rnd_t rnd = MPFR_RNDN) {
    ExtFloat r(p);
    mpfr_sub(r.v_, a.v_, b.v_, rnd);
    return r;
  }
  static ExtFloat mul(const ExtFloat& a, const ExtFloat& b, mpfr_prec_t p,
                      mpfr_rnd_t rnd = MPFR_RNDN) {
    ExtFloat r(p);
    mpfr_mul(r.v_, a.v_, b.v_, rnd);
    return r;
  }
  static ExtFloat div(const ExtFloat& a, const ExtFloat& b, mpfr_prec_t p,
                      mpfr_rnd_t rnd = MPFR_RNDN) {
    ExtFloat r(p);
    mpfr_div(r.v_, a.v_, b.v_, rnd);
    return r;
  }
  static ExtFloat sqrt(const ExtFloat& a, mpfr_prec_t p,
                       mpfr_rnd_t rnd = MPFR_RNDN) {
    ExtFloat r(p);
    mpfr_sqrt(r.v_, a.v_, rnd);
    return r;
  }
  static ExtFloat neg(const ExtFloat& a) {
    ExtFloat r(a);
    mpfr_neg(r.v_, r.v_, MPFR_RNDN);
    return r;
  }
  static ExtFloat abs(const ExtFloat& a) {
    ExtFloat r(a);
    mpfr_abs(r.v_, r.v_, MPFR_RNDN);
    return r;
  }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

 private:
  mpfr_t v_;
};

}  // namespace fmmlab
