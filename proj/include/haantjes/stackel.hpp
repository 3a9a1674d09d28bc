#pragma once

#include <span>
#include <string>
#include <vector>

#include "haantjes/algebra.hpp"
#include "haantjes/report.hpp"
#include "haantjes/sampling.hpp"
#include "haantjes/tensor.hpp"

namespace haantjes {

/// Generalized Staeckel data over a chart whose blocks are sigma_1..sigma_m.
/// Row a of S may only use the positions of block a (and its momenta when
/// momentum_rows is set); f_a may use positions and momenta of block a.
struct StackelSpec {
  ChartPtr chart;
  std::vector<std::vector<Expression>> matrix;  // m x m
  std::vector<Expression> vector;               // m
  bool momentum_rows = false;

  int m() const { return static_cast<int>(vector.size()); }
};

struct StackelSystem {
  std::vector<Expression> hamiltonians;  // H = S^{-1} F
  std::vector<OperatorField> operators;  // K_alpha; empty when no generator fits
  int generator = 0;                     // 1-based; 0 when operators are absent
  Expression det;
  std::vector<std::vector<Expression>> adjugate;  // det * S^{-1}

  /// Expressions that must stay away from zero for the system to be
  /// evaluable: det S and the adjugate entries of the generator row.
  std::vector<Expression> guards() const;
};

/// Throws ConstructionError naming the entry and variable when row locality
/// is violated, or ShapeError on inconsistent sizes.
void check_locality(const StackelSpec& spec);

/// Locality (structural) plus |det S| >= det_min at the samples.
VerificationReport validate_spec(const StackelSpec& spec, const SampleSet& samples,
                                 double det_min = 1e-6);

/// Symbolic determinant by cofactor expansion (m small).
Expression determinant(const std::vector<std::vector<Expression>>& s);
std::vector<std::vector<Expression>> adjugate(const std::vector<std::vector<Expression>>& s);

/// H_alpha = sum_i adj(alpha, i) f_i / det S, and K_alpha with slot
/// coefficient adj(alpha, i) / adj(g, i) on every q- and p-slot of block i.
/// `generator` is 1-based. Throws ConstructionError when an adjugate entry
/// of the generator row vanishes identically.
StackelSystem build_system(const StackelSpec& spec, int generator = 1);

/// Classic Staeckel matrix (all blocks of size 1). Operators are built with
/// the first generator whose adjugate row has no structural zero.
StackelSystem build_akn(const ChartPtr& chart, const std::vector<std::vector<Expression>>& s,
                        const std::vector<Expression>& f);

/// r_a = f_a(x) - sum_b S_ab(x) h_b.
std::vector<double> separation_residuals(const StackelSpec& spec, std::span<const double> h,
                                         std::span<const double> x);

/// Everything the construction promises: S H - F = 0, T-involution, the
/// chains K_alpha^T dH_g = dH_alpha and the algebra checks.
VerificationReport verify_system(const StackelSpec& spec, const StackelSystem& sys,
                                 const SampleSet& samples, double tol = 1e-9,
                                 double identity_tol = 1e-10);

/// max |M - M^T| with M = [dphi/dp]^{-1} [dphi/dq]; parameters of phi are
/// bound to `h`. Throws EvalError when the momentum Jacobian is singular.
double symmetry_condition(std::span<const Expression> phi, std::span<const double> x,
                          std::span<const double> h = {});

/// symmetry_condition over samples; h is taken from `level` evaluated at
/// each sample when given (points then lie on their own level set),
/// otherwise from `fixed_h`.
VerificationReport symmetry_check(std::span<const Expression> phi,
                                  std::span<const Expression> level,
                                  std::span<const double> fixed_h, const SampleSet& samples,
                                  double tol = 1e-9);

}  // namespace haantjes
