#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "haantjes/expr.hpp"

namespace haantjes {

/// Sparse multivariate polynomial with exact rational coefficients over the
/// chart variables followed by the parameters. Used only to print
/// constructed expressions in a canonical form and to cancel exact
/// quotients; it is not a general simplifier.
class Polynomial {
 public:
  using Monomial = std::vector<int>;

  /// Total order used both for printing and as the division order: higher
  /// total degree first, then lexicographic with momenta ahead of positions
  /// and parameters last.
  struct Order {
    int n = 0;
    bool operator()(const Monomial& a, const Monomial& b) const;
  };

  Polynomial(int n, int nvars);

  static Polynomial constant(int n, int nvars, const Rational& c);
  static Polynomial variable(int n, int nvars, int index);

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  std::optional<Rational> constant_value() const;
  const std::map<Monomial, Rational, Order>& terms() const { return terms_; }

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator-() const;
  Polynomial scaled(const Rational& c) const;
  Polynomial pow(int k) const;

  /// Quotient when `divisor` divides this polynomial exactly.
  std::optional<Polynomial> divide_exact(const Polynomial& divisor) const;

  /// Largest monomial dividing every term (exponent-wise minimum).
  Monomial monomial_content() const;
  Polynomial divide_monomial(const Monomial& m) const;
  const Rational& leading_coefficient() const { return terms_.begin()->second; }

  bool operator==(const Polynomial& o) const { return terms_ == o.terms_; }

 private:
  void add_term(const Monomial& m, const Rational& c);

  int n_;
  int nvars_;
  std::map<Monomial, Rational, Order> terms_;
};

std::optional<Polynomial> to_polynomial(const Expression& e);

/// Canonical text of p, e.g. "p1^2 + p2^2 + q1*q2".
std::string canonical_string(const Polynomial& p, const Chart& chart, const ParamNames& params);

Expression to_expression(const Polynomial& p, const ChartPtr& chart, const ParamNames& params);

/// Rewrites e in canonical form when it is a polynomial, or a quotient of
/// two polynomials (common monomial factors and the denominator's leading
/// coefficient are cancelled, exact quotients are carried out). Anything
/// else is returned unchanged.
Expression canonicalize(const Expression& e);

/// Canonical quotient num/den with the same cancellations as canonicalize.
Expression canonical_quotient(const Expression& num, const Expression& den);

/// True when e is identically zero as a rational function (decided only for
/// the polynomial/quotient fragment; otherwise only literal zero counts).
bool identically_zero(const Expression& e);

}  // namespace haantjes
