#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "haantjes/chart.hpp"

namespace haantjes {

using Rational = boost::multiprecision::cpp_rational;

enum class Op { Constant, Variable, Parameter, Add, Sub, Mul, Div, Pow, Neg };

/// Immutable AST node. Binary nodes use lhs/rhs; Neg and Pow use lhs only.
struct Node {
  Op op = Op::Constant;
  Rational constant;
  double numeric = 0.0;  // double image of `constant`
  int index = -1;        // Variable / Parameter slot
  int exponent = 0;      // Pow
  int position = -1;     // source offset, -1 for built nodes
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

using NodePtr = std::shared_ptr<const Node>;
using ParamNames = std::shared_ptr<const std::vector<std::string>>;

/// Rational-coefficient scalar expression over the variables of a chart and,
/// optionally, a list of named parameters that are held fixed under
/// differentiation (level-set constants h_1..h_m and the like).
class Expression {
 public:
  Expression(NodePtr root, ChartPtr chart, ParamNames params = nullptr);

  const Node& root() const { return *root_; }
  const NodePtr& root_ptr() const { return root_; }
  const ChartPtr& chart() const { return chart_; }
  const ParamNames& params() const { return params_; }
  int param_count() const { return params_ ? static_cast<int>(params_->size()) : 0; }

  std::string str() const;

 private:
  NodePtr root_;
  ChartPtr chart_;
  ParamNames params_;
};

/// Parses the grammar
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := ['-'] atom ['^' integer]
///   atom   := number | ident | '(' expr ')'
/// Negated numbers and quotients of two numbers fold into one rational
/// constant, so parse(print(parse(s))) reproduces parse(s) node for node.
Expression parse(std::string_view text, ChartPtr chart, std::vector<std::string> params = {});

/// Canonical printer; output is accepted by parse().
std::string print(const Expression& e);

/// Structural AST equality (constants compared exactly).
bool structurally_equal(const Expression& a, const Expression& b);

double eval(const Expression& e, std::span<const double> x, std::span<const double> params = {});
double eval(const Expression& e, const Point& x, std::span<const double> params = {});

struct Jet1 {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Value, gradient and Hessian. Only the upper triangle is computed; the
/// accessor mirrors it, so H(i,j) and H(j,i) are the same double.
struct Jet2 {
  double value = 0.0;
  std::vector<double> gradient;
  std::vector<double> upper;  // packed row-major upper triangle
  int dim = 0;

  double hessian(int i, int j) const;
  std::vector<double> hessian_matrix() const;  // dense row-major
};

Jet1 jet1(const Expression& e, std::span<const double> x, std::span<const double> params = {});
Jet2 jet2(const Expression& e, std::span<const double> x, std::span<const double> params = {});
Jet2 jet2(const Expression& e, const Point& x, std::span<const double> params = {});

// Builders. These fold trivial constants (0 + x, 1 * x, c1 * c2, ...) and
// nothing else.
Expression constant(ChartPtr chart, const Rational& value);
Expression variable(ChartPtr chart, int index);
Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression pow(const Expression& base, int exponent);

std::optional<Rational> as_constant(const Expression& e);
bool is_zero(const Expression& e);

/// Sorted distinct chart variable indices referenced by e.
std::vector<int> variables(const Expression& e);

/// Replaces variable i of e's chart by replacements[i]; all replacements
/// must share one chart, which becomes the chart of the result.
Expression substitute(const Expression& e, std::span<const Expression> replacements);

/// Symbolic partial derivative with respect to chart variable `index`.
Expression differentiate(const Expression& e, int index);

/// Same AST re-homed on an equal chart object (names must agree).
Expression rebind(const Expression& e, ChartPtr chart);

}  // namespace haantjes
