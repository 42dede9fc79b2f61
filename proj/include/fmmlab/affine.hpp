#pragma once

// Affine forms alpha0 + sum(alpha_i * eps_i), eps_i in [-1, 1], with
// extended-precision coefficients. Fresh symbols absorb arithmetic rounding
// residues, nonlinear remainders, and condensation; concretizations only
// ever grow, so every form soundly encloses the real-arithmetic ideal
// value it stands for.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fmmlab/extfloat.hpp"

namespace fmmlab {

// Monotone source of fresh noise symbols plus the arithmetic configuration
// of one analysis run.
struct SymbolPool {
  mpfr_prec_t prec = ExtFloat::kDefaultPrec;
  int budget = 30;  // max term count per form
  std::uint32_t next_id = 1;

  std::uint32_t fresh() { return next_id++; }
};

struct AffineForm {
  ExtFloat center;
  // (symbol id, coefficient), sorted by symbol id.
  std::vector<std::pair<std::uint32_t, ExtFloat>> terms;

  // Upper bound on sum |alpha_i| (rounded up).
  ExtFloat radius(mpfr_prec_t prec) const;
  // Outward concretization [center - radius, center + radius].
  std::pair<ExtFloat, ExtFloat> concretize(mpfr_prec_t prec) const;
  double width() const;
};

AffineForm affine_const(double v, const SymbolPool& pool);
AffineForm affine_const(const ExtFloat& v);

// Top (unbounded) results are nullopt.
using MaybeAffine = std::optional<AffineForm>;

enum class AffineOp { add, sub, mul };

MaybeAffine affine_binary(AffineOp op, const AffineForm& a, const AffineForm& b,
                          SymbolPool& pool);

// Min-range linearization of 1/x over the form's concretization; Top when
// 0 lies in the interval.
MaybeAffine affine_inverse(const AffineForm& a, SymbolPool& pool);

// Min-range linearization of sqrt; Top when the interval reaches below 0
// (the caller reports "possible-negative-sqrt").
MaybeAffine affine_sqrt(const AffineForm& a, SymbolPool& pool);

// Replace the smallest terms by one fresh symbol so that at most `budget`
// terms remain. Never shrinks the concretization.
AffineForm condense(const AffineForm& a, int budget, SymbolPool& pool);

}  // namespace fmmlab
