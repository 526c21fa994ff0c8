#pragma once

#include "qdat/errors.hpp"
#include "qdat/exact.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qdat {

enum class CausalPart { Retarded, Advanced };
enum class FrequencySign { Positive, Negative };

/// One of the four elementary kernels: a causal half (retarded or advanced)
/// restricted to one frequency sign. Every named propagator is an exact
/// linear combination of these four.
struct BasisKernel {
  CausalPart causal;
  FrequencySign frequency;

  friend bool operator==(const BasisKernel&, const BasisKernel&) = default;
};

inline constexpr std::array<BasisKernel, 4> kBasisKernels = {{
    {CausalPart::Retarded, FrequencySign::Positive},
    {CausalPart::Retarded, FrequencySign::Negative},
    {CausalPart::Advanced, FrequencySign::Positive},
    {CausalPart::Advanced, FrequencySign::Negative},
}};

inline constexpr std::array<std::string_view, 4> kBasisLabels = {"R+", "R-", "A+", "A-"};

constexpr std::size_t basis_index(BasisKernel b) {
  return (b.causal == CausalPart::Advanced ? 2u : 0u) +
         (b.frequency == FrequencySign::Negative ? 1u : 0u);
}

/// Exact linear combination of the four basis kernels. The representation is
/// canonical: absent terms carry coefficient zero, so equality of expressions
/// is coefficient-wise equality.
class KernelExpr {
 public:
  KernelExpr() = default;

  const ExactComplex& coefficient(BasisKernel b) const { return coeff_[basis_index(b)]; }
  const ExactComplex& coefficient(std::size_t i) const { return coeff_[i]; }
  const std::array<ExactComplex, 4>& coefficients() const { return coeff_; }

  KernelExpr& add_term(BasisKernel b, const ExactComplex& c) {
    coeff_[basis_index(b)] += c;
    return *this;
  }

  bool is_zero() const {
    for (const auto& c : coeff_)
      if (!c.is_zero()) return false;
    return true;
  }

  friend bool operator==(const KernelExpr&, const KernelExpr&) = default;

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < 4; ++i) {
      if (coeff_[i].is_zero()) continue;
      if (!s.empty()) s += " + ";
      s += "(" + qdat::to_string(coeff_[i]) + ")*" + std::string(kBasisLabels[i]);
    }
    return s.empty() ? "0" : s;
  }

 private:
  std::array<ExactComplex, 4> coeff_{};
};

/// Named propagators of the direct-action algebra.
///
/// Conventions (frequency parts written as the cut functions Delta+-):
///   d_plus  = -i * delta_plus,   d_minus = +i * delta_minus
///   odd     = d_plus + d_minus          (homogeneous, odd in time)
///   one     = delta_plus + delta_minus  (homogeneous, even in time)
///   bar     = (ret + adv) / 2
///   feynman = bar - (i/2) * one,   dyson = bar + (i/2) * one
enum class KernelName {
  Ret,
  Adv,
  Bar,
  Odd,
  One,
  Feynman,
  Dyson,
  DPlus,
  DMinus,
  DeltaPlus,
  DeltaMinus,
};

inline const std::vector<std::pair<std::string, KernelName>>& kernel_name_table() {
  static const std::vector<std::pair<std::string, KernelName>> table = {
      {"ret", KernelName::Ret},
      {"adv", KernelName::Adv},
      {"bar", KernelName::Bar},
      {"odd", KernelName::Odd},
      {"one", KernelName::One},
      {"feynman", KernelName::Feynman},
      {"dyson", KernelName::Dyson},
      {"d_plus", KernelName::DPlus},
      {"d_minus", KernelName::DMinus},
      {"delta_plus", KernelName::DeltaPlus},
      {"delta_minus", KernelName::DeltaMinus},
  };
  return table;
}

inline std::optional<KernelName> parse_kernel_name(std::string_view name) {
  for (const auto& [label, value] : kernel_name_table())
    if (label == name) return value;
  return std::nullopt;
}

inline std::string kernel_label(KernelName name) {
  for (const auto& [label, value] : kernel_name_table())
    if (value == name) return label;
  return "?";
}

/// Canonical basis expansion of a named propagator. Basis order below is
/// R+, R-, A+, A-.
inline KernelExpr canonical(KernelName name) {
  auto build = [](ExactComplex rp, ExactComplex rm, ExactComplex ap, ExactComplex am) {
    KernelExpr e;
    e.add_term(kBasisKernels[0], rp);
    e.add_term(kBasisKernels[1], rm);
    e.add_term(kBasisKernels[2], ap);
    e.add_term(kBasisKernels[3], am);
    return e;
  };
  const ExactComplex zero = exact(0);
  const ExactComplex one1 = exact(1);
  const ExactComplex half = exact(1, 2);
  switch (name) {
    case KernelName::Ret:
      return build(one1, one1, zero, zero);
    case KernelName::Adv:
      return build(zero, zero, one1, one1);
    case KernelName::Bar:
      return build(half, half, half, half);
    case KernelName::Odd:
      return build(one1, one1, -one1, -one1);
    case KernelName::One:
      return build(exact_i(), -exact_i(), -exact_i(), exact_i());
    case KernelName::Feynman:
      return build(one1, zero, zero, one1);
    case KernelName::Dyson:
      return build(zero, one1, one1, zero);
    case KernelName::DPlus:
      return build(one1, zero, -one1, zero);
    case KernelName::DMinus:
      return build(zero, one1, zero, -one1);
    case KernelName::DeltaPlus:
      return build(exact_i(), zero, -exact_i(), zero);
    case KernelName::DeltaMinus:
      return build(zero, -exact_i(), zero, exact_i());
  }
  throw ValidationError("unknown kernel name");
}

inline KernelExpr canonical(std::string_view name) {
  auto parsed = parse_kernel_name(name);
  if (!parsed) throw ValidationError("unknown kernel name: " + std::string(name));
  return canonical(*parsed);
}

/// sa * a + sb * b with exact coefficients.
inline KernelExpr combine(const KernelExpr& a, const ExactComplex& sa, const KernelExpr& b,
                          const ExactComplex& sb) {
  KernelExpr out;
  for (const auto& basis : kBasisKernels) {
    out.add_term(basis, sa * a.coefficient(basis) + sb * b.coefficient(basis));
  }
  return out;
}

inline KernelExpr scale(const KernelExpr& a, const ExactComplex& s) {
  return combine(a, s, KernelExpr{}, exact(0));
}

/// Argument reflection (t, x) -> (-t, -x). On the basis kernels this swaps
/// retarded with advanced while flipping the frequency sign, i.e.
/// R+ <-> A- and R- <-> A+, with coefficients unchanged. It is an involution.
inline KernelExpr reflect(const KernelExpr& e) {
  KernelExpr out;
  for (const auto& basis : kBasisKernels) {
    BasisKernel image{
        basis.causal == CausalPart::Retarded ? CausalPart::Advanced : CausalPart::Retarded,
        basis.frequency == FrequencySign::Positive ? FrequencySign::Negative
                                                   : FrequencySign::Positive};
    out.add_term(image, e.coefficient(basis));
  }
  return out;
}

struct IdentityCheck {
  std::string name;
  std::string statement;
  bool holds;
};

struct IdentitySuiteReport {
  std::vector<IdentityCheck> checks;

  bool all_hold() const {
    for (const auto& c : checks)
      if (!c.holds) return false;
    return true;
  }
};

/// Evaluates the defining propagator relations in exact arithmetic. Every
/// check reduces both sides to canonical basis coefficients and compares
/// them for equality; no tolerances are involved.
inline IdentitySuiteReport verify_identity_suite() {
  const KernelExpr ret = canonical(KernelName::Ret);
  const KernelExpr adv = canonical(KernelName::Adv);
  const KernelExpr bar = canonical(KernelName::Bar);
  const KernelExpr odd = canonical(KernelName::Odd);
  const KernelExpr one = canonical(KernelName::One);
  const KernelExpr feynman = canonical(KernelName::Feynman);
  const KernelExpr dyson = canonical(KernelName::Dyson);
  const KernelExpr d_plus = canonical(KernelName::DPlus);
  const KernelExpr d_minus = canonical(KernelName::DMinus);
  const KernelExpr delta_plus = canonical(KernelName::DeltaPlus);
  const KernelExpr delta_minus = canonical(KernelName::DeltaMinus);

  const ExactComplex one1 = exact(1);

  IdentitySuiteReport report;
  auto check = [&report](std::string name, std::string statement, bool holds) {
    report.checks.push_back({std::move(name), std::move(statement), holds});
  };

  check("retarded_decomposition", "ret = bar + (1/2) odd",
        ret == combine(bar, one1, odd, exact(1, 2)));
  check("advanced_decomposition", "adv = bar - (1/2) odd",
        adv == combine(bar, one1, odd, exact(-1, 2)));
  check("odd_frequency_split", "odd = d_plus + d_minus",
        odd == combine(d_plus, one1, d_minus, one1));
  check("positive_cut_phase", "d_plus = -i delta_plus",
        d_plus == scale(delta_plus, exact_i(-1)));
  check("negative_cut_phase", "d_minus = i delta_minus",
        d_minus == scale(delta_minus, exact_i(1)));
  check("even_from_frequency_parts", "one = i (d_plus - d_minus)",
        one == scale(combine(d_plus, one1, d_minus, -one1), exact_i(1)));
  check("even_from_cuts", "one = delta_plus + delta_minus",
        one == combine(delta_plus, one1, delta_minus, one1));
  check("feynman_components", "feynman = R+ + A-",
        feynman == KernelExpr{}
                       .add_term(kBasisKernels[0], one1)
                       .add_term(kBasisKernels[3], one1));
  check("feynman_decomposition", "feynman = bar - (i/2) one",
        feynman == combine(bar, one1, one, exact_i(-1, 2)));
  check("dyson_decomposition", "dyson = bar + (i/2) one",
        dyson == combine(bar, one1, one, exact_i(1, 2)));
  check("dyson_components", "dyson = A+ + R-",
        dyson == KernelExpr{}
                     .add_term(kBasisKernels[2], one1)
                     .add_term(kBasisKernels[1], one1));
  check("feynman_dyson_gap", "feynman - dyson = -i one",
        combine(feynman, one1, dyson, -one1) == scale(one, exact_i(-1)));
  bool distinct = true;
  for (const auto& basis : kBasisKernels)
    distinct = distinct && feynman.coefficient(basis) != dyson.coefficient(basis);
  check("feynman_dyson_distinct", "feynman and dyson differ in every basis coefficient",
        distinct);
  check("reflection_swaps_causality", "reflect(ret) = adv", reflect(ret) == adv);
  check("reflection_cut_antisymmetry", "reflect(d_plus) = -d_minus",
        reflect(d_plus) == scale(d_minus, -one1));
  check("reflection_fixes_time_symmetric", "reflect(bar) = bar and reflect(one) = one",
        reflect(bar) == bar && reflect(one) == one);
  check("reflection_involution", "reflect(reflect(feynman)) = feynman",
        reflect(reflect(feynman)) == feynman);
  return report;
}

}  // namespace qdat
