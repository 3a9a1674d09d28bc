#include "haantjes/expr.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace haantjes {

namespace {

NodePtr make_constant(const Rational& value, int position = -1) {
  auto node = std::make_shared<Node>();
  node->op = Op::Constant;
  node->constant = value;
  node->numeric = static_cast<double>(value);
  node->position = position;
  return node;
}

NodePtr make_leaf(Op op, int index, int position = -1) {
  auto node = std::make_shared<Node>();
  node->op = op;
  node->index = index;
  node->position = position;
  return node;
}

NodePtr make_binary(Op op, NodePtr lhs, NodePtr rhs, int position = -1) {
  auto node = std::make_shared<Node>();
  node->op = op;
  node->lhs = std::move(lhs);
  node->rhs = std::move(rhs);
  node->position = position;
  return node;
}

NodePtr make_neg(NodePtr child, int position = -1) {
  auto node = std::make_shared<Node>();
  node->op = Op::Neg;
  node->lhs = std::move(child);
  node->position = position;
  return node;
}

NodePtr make_pow(NodePtr base, int exponent, int position = -1) {
  auto node = std::make_shared<Node>();
  node->op = Op::Pow;
  node->lhs = std::move(base);
  node->exponent = exponent;
  node->position = position;
  return node;
}

class Parser {
 public:
  Parser(std::string_view text, const Chart& chart, const std::vector<std::string>& params)
      : text_(text), chart_(chart), params_(params) {}

  NodePtr run() {
    NodePtr root = expr();
    skip_space();
    if (pos_ != static_cast<int>(text_.size()))
      throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return root;
  }

 private:
  void skip_space() {
    while (pos_ < static_cast<int>(text_.size()) &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  char peek() {
    skip_space();
    return pos_ < static_cast<int>(text_.size()) ? text_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      const int at = pos_++;
      lhs = make_binary(c == '+' ? Op::Add : Op::Sub, lhs, term(), at);
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      const int at = pos_++;
      NodePtr rhs = factor();
      if (c == '/' && lhs->op == Op::Constant && rhs->op == Op::Constant && rhs->constant != 0) {
        lhs = make_constant(lhs->constant / rhs->constant, lhs->position);
      } else {
        lhs = make_binary(c == '*' ? Op::Mul : Op::Div, lhs, rhs, at);
      }
    }
  }

  NodePtr factor() {
    bool negate = false;
    int neg_at = -1;
    if (peek() == '-') {
      negate = true;
      neg_at = pos_++;
    }
    NodePtr node = atom();
    if (peek() == '^') {
      const int at = pos_++;
      node = make_pow(node, integer(), at);
    }
    if (!negate) return node;
    if (node->op == Op::Constant) return make_constant(-node->constant, neg_at);
    return make_neg(node, neg_at);
  }

  int integer() {
    skip_space();
    const int start = pos_;
    bool negative = false;
    if (pos_ < static_cast<int>(text_.size()) && (text_[pos_] == '-' || text_[pos_] == '+')) {
      negative = text_[pos_] == '-';
      ++pos_;
    }
    long long value = 0;
    int digits = 0;
    while (pos_ < static_cast<int>(text_.size()) &&
           std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      value = value * 10 + (text_[pos_] - '0');
      if (value > 1000000) throw ParseError("exponent too large", start);
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw ParseError("expected integer exponent", start);
    return static_cast<int>(negative ? -value : value);
  }

  NodePtr atom() {
    const char c = peek();
    const int start = pos_;
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      if (peek() != ')') throw ParseError("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < static_cast<int>(text_.size()) &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      if (auto index = chart_.find(name)) return make_leaf(Op::Variable, *index, start);
      for (std::size_t k = 0; k < params_.size(); ++k)
        if (params_[k] == name) return make_leaf(Op::Parameter, static_cast<int>(k), start);
      throw ParseError("unknown variable '" + std::string(name) + "'", start);
    }
    if (c == '\0') throw ParseError("unexpected end of expression", pos_);
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr number() {
    const int start = pos_;
    boost::multiprecision::cpp_int mantissa = 0;
    int scale = 0;
    int digits = 0;
    auto at_digit = [&] {
      return pos_ < static_cast<int>(text_.size()) &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]));
    };
    while (at_digit()) {
      mantissa = mantissa * 10 + (text_[pos_++] - '0');
      ++digits;
    }
    if (pos_ < static_cast<int>(text_.size()) && text_[pos_] == '.') {
      ++pos_;
      while (at_digit()) {
        mantissa = mantissa * 10 + (text_[pos_++] - '0');
        --scale;
        ++digits;
      }
    }
    if (digits == 0) throw ParseError("malformed number", start);
    if (pos_ < static_cast<int>(text_.size()) && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      bool negative = false;
      if (pos_ < static_cast<int>(text_.size()) && (text_[pos_] == '-' || text_[pos_] == '+'))
        negative = text_[pos_++] == '-';
      int exponent = 0, exp_digits = 0;
      while (at_digit()) {
        exponent = exponent * 10 + (text_[pos_++] - '0');
        if (exponent > 400) throw ParseError("exponent out of range", start);
        ++exp_digits;
      }
      if (exp_digits == 0) throw ParseError("malformed number", start);
      scale += negative ? -exponent : exponent;
    }
    Rational value(mantissa);
    const boost::multiprecision::cpp_int ten_power =
        boost::multiprecision::pow(boost::multiprecision::cpp_int(10), std::abs(scale));
    if (scale >= 0) {
      value *= Rational(ten_power);
    } else {
      value /= Rational(ten_power);
    }
    return make_constant(value, start);
  }

  std::string_view text_;
  const Chart& chart_;
  const std::vector<std::string>& params_;
  int pos_ = 0;
};

// ---------------------------------------------------------------- printing

bool is_integer(const Rational& r) { return boost::multiprecision::denominator(r) == 1; }

class Printer {
 public:
  Printer(const Chart& chart, const ParamNames& params) : chart_(chart), params_(params) {}

  std::string expr(const Node& n) const {
    if (n.op == Op::Add || n.op == Op::Sub) {
      const Node& r = *n.rhs;
      const bool wrap = r.op == Op::Add || r.op == Op::Sub;
      return expr(*n.lhs) + (n.op == Op::Add ? " + " : " - ") +
             (wrap ? "(" + expr(r) + ")" : term(r));
    }
    return term(n);
  }

  std::string term(const Node& n) const {
    if (n.op == Op::Mul || n.op == Op::Div) {
      const Node& l = *n.lhs;
      const Node& r = *n.rhs;
      const bool wrap_l = l.op == Op::Add || l.op == Op::Sub;
      const bool wrap_r = r.op == Op::Add || r.op == Op::Sub || r.op == Op::Mul || r.op == Op::Div;
      std::string out = wrap_l ? "(" + expr(l) + ")" : term(l);
      out += n.op == Op::Mul ? "*" : "/";
      out += wrap_r ? "(" + expr(r) + ")" : factor(r);
      return out;
    }
    return factor(n);
  }

  std::string factor(const Node& n) const {
    switch (n.op) {
      case Op::Neg: {
        const Node& c = *n.lhs;
        const bool bare = c.op == Op::Variable || c.op == Op::Parameter || c.op == Op::Pow ||
                          (c.op == Op::Constant && c.constant >= 0 && is_integer(c.constant));
        return bare ? "-" + factor(c) : "-(" + expr(c) + ")";
      }
      case Op::Pow:
        return atom(*n.lhs) + "^" + std::to_string(n.exponent);
      case Op::Constant:
        if (n.constant < 0 && is_integer(n.constant)) return n.constant.str();
        return atom(n);
      default:
        return atom(n);
    }
  }

  std::string atom(const Node& n) const {
    switch (n.op) {
      case Op::Variable:
        return chart_.name(n.index);
      case Op::Parameter:
        return params_ ? params_->at(n.index) : "param" + std::to_string(n.index);
      case Op::Constant:
        if (is_integer(n.constant) && n.constant >= 0) return n.constant.str();
        return "(" + n.constant.str() + ")";
      default:
        return "(" + expr(n) + ")";
    }
  }

 private:
  const Chart& chart_;
  const ParamNames& params_;
};

bool nodes_equal(const Node& a, const Node& b) {
  if (&a == &b) return true;
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::Constant:
      return a.constant == b.constant;
    case Op::Variable:
    case Op::Parameter:
      return a.index == b.index;
    case Op::Pow:
      return a.exponent == b.exponent && nodes_equal(*a.lhs, *b.lhs);
    case Op::Neg:
      return nodes_equal(*a.lhs, *b.lhs);
    default:
      return nodes_equal(*a.lhs, *b.lhs) && nodes_equal(*a.rhs, *b.rhs);
  }
}

void collect_variables(const Node& n, std::set<int>& out) {
  switch (n.op) {
    case Op::Variable:
      out.insert(n.index);
      return;
    case Op::Constant:
    case Op::Parameter:
      return;
    case Op::Neg:
    case Op::Pow:
      collect_variables(*n.lhs, out);
      return;
    default:
      collect_variables(*n.lhs, out);
      collect_variables(*n.rhs, out);
  }
}

NodePtr substitute_node(const NodePtr& n, std::span<const Expression> with) {
  switch (n->op) {
    case Op::Variable:
      return with[n->index].root_ptr();
    case Op::Constant:
    case Op::Parameter:
      return n;
    case Op::Neg:
      return make_neg(substitute_node(n->lhs, with), n->position);
    case Op::Pow:
      return make_pow(substitute_node(n->lhs, with), n->exponent, n->position);
    default:
      return make_binary(n->op, substitute_node(n->lhs, with), substitute_node(n->rhs, with),
                         n->position);
  }
}

const ChartPtr& common_chart(const Expression& a, const Expression& b) {
  if (a.chart() != b.chart() && !(*a.chart() == *b.chart()))
    throw ShapeError("expressions live on different charts");
  return a.chart();
}

ParamNames common_params(const Expression& a, const Expression& b) {
  if (!a.params() || a.params()->empty()) return b.params();
  if (!b.params() || b.params()->empty()) return a.params();
  if (a.params() != b.params() && *a.params() != *b.params())
    throw ShapeError("expressions use different parameter lists");
  return a.params();
}

bool is_constant_value(const Expression& e, int value) {
  return e.root().op == Op::Constant && e.root().constant == value;
}

}  // namespace

Expression::Expression(NodePtr root, ChartPtr chart, ParamNames params)
    : root_(std::move(root)), chart_(std::move(chart)), params_(std::move(params)) {
  if (!root_ || !chart_) throw ShapeError("expression needs a root node and a chart");
}

std::string Expression::str() const { return print(*this); }

Expression parse(std::string_view text, ChartPtr chart, std::vector<std::string> params) {
  if (!chart) throw ShapeError("parse needs a chart");
  for (const auto& name : params)
    if (chart->find(name)) throw ShapeError("parameter '" + name + "' shadows a chart variable");
  Parser parser(text, *chart, params);
  NodePtr root = parser.run();
  ParamNames names =
      params.empty() ? nullptr : std::make_shared<const std::vector<std::string>>(std::move(params));
  return Expression(std::move(root), std::move(chart), std::move(names));
}

std::string print(const Expression& e) {
  return Printer(*e.chart(), e.params()).expr(e.root());
}

bool structurally_equal(const Expression& a, const Expression& b) {
  return nodes_equal(a.root(), b.root());
}

Expression constant(ChartPtr chart, const Rational& value) {
  return Expression(make_constant(value), std::move(chart));
}

Expression variable(ChartPtr chart, int index) {
  if (index < 0 || index >= chart->dim()) throw ShapeError("variable index out of range");
  return Expression(make_leaf(Op::Variable, index), std::move(chart));
}

std::optional<Rational> as_constant(const Expression& e) {
  if (e.root().op == Op::Constant) return e.root().constant;
  return std::nullopt;
}

bool is_zero(const Expression& e) { return is_constant_value(e, 0); }

Expression operator+(const Expression& a, const Expression& b) {
  const ChartPtr& chart = common_chart(a, b);
  ParamNames params = common_params(a, b);
  if (auto ca = as_constant(a), cb = as_constant(b); ca && cb)
    return Expression(make_constant(*ca + *cb), chart, params);
  if (is_zero(a)) return Expression(b.root_ptr(), chart, params);
  if (is_zero(b)) return Expression(a.root_ptr(), chart, params);
  return Expression(make_binary(Op::Add, a.root_ptr(), b.root_ptr()), chart, params);
}

Expression operator-(const Expression& a, const Expression& b) {
  const ChartPtr& chart = common_chart(a, b);
  ParamNames params = common_params(a, b);
  if (auto ca = as_constant(a), cb = as_constant(b); ca && cb)
    return Expression(make_constant(*ca - *cb), chart, params);
  if (is_zero(b)) return Expression(a.root_ptr(), chart, params);
  if (is_zero(a)) return -Expression(b.root_ptr(), chart, params);
  return Expression(make_binary(Op::Sub, a.root_ptr(), b.root_ptr()), chart, params);
}

Expression operator*(const Expression& a, const Expression& b) {
  const ChartPtr& chart = common_chart(a, b);
  ParamNames params = common_params(a, b);
  if (auto ca = as_constant(a), cb = as_constant(b); ca && cb)
    return Expression(make_constant(*ca * *cb), chart, params);
  if (is_zero(a) || is_zero(b)) return Expression(make_constant(0), chart, params);
  if (is_constant_value(a, 1)) return Expression(b.root_ptr(), chart, params);
  if (is_constant_value(b, 1)) return Expression(a.root_ptr(), chart, params);
  if (is_constant_value(a, -1)) return -Expression(b.root_ptr(), chart, params);
  if (is_constant_value(b, -1)) return -Expression(a.root_ptr(), chart, params);
  return Expression(make_binary(Op::Mul, a.root_ptr(), b.root_ptr()), chart, params);
}

Expression operator/(const Expression& a, const Expression& b) {
  const ChartPtr& chart = common_chart(a, b);
  ParamNames params = common_params(a, b);
  auto ca = as_constant(a);
  auto cb = as_constant(b);
  if (ca && cb && *cb != 0) return Expression(make_constant(*ca / *cb), chart, params);
  if (is_zero(a) && !(cb && *cb == 0)) return Expression(make_constant(0), chart, params);
  if (is_constant_value(b, 1)) return Expression(a.root_ptr(), chart, params);
  if (is_constant_value(b, -1)) return -Expression(a.root_ptr(), chart, params);
  return Expression(make_binary(Op::Div, a.root_ptr(), b.root_ptr()), chart, params);
}

Expression operator-(const Expression& a) {
  if (auto c = as_constant(a)) return Expression(make_constant(-*c), a.chart(), a.params());
  if (a.root().op == Op::Neg) return Expression(a.root().lhs, a.chart(), a.params());
  return Expression(make_neg(a.root_ptr()), a.chart(), a.params());
}

Expression pow(const Expression& base, int exponent) {
  if (exponent == 0) return Expression(make_constant(1), base.chart(), base.params());
  if (exponent == 1) return base;
  if (auto c = as_constant(base); c && (exponent > 0 || *c != 0)) {
    Rational result = 1;
    for (int k = 0; k < std::abs(exponent); ++k) result *= *c;
    if (exponent < 0) result = 1 / result;
    return Expression(make_constant(result), base.chart(), base.params());
  }
  return Expression(make_pow(base.root_ptr(), exponent), base.chart(), base.params());
}

std::vector<int> variables(const Expression& e) {
  std::set<int> found;
  collect_variables(e.root(), found);
  return {found.begin(), found.end()};
}

Expression substitute(const Expression& e, std::span<const Expression> replacements) {
  if (static_cast<int>(replacements.size()) != e.chart()->dim())
    throw ShapeError("substitution needs one replacement per chart variable");
  for (const auto& r : replacements)
    if (!(*r.chart() == *replacements.front().chart()))
      throw ShapeError("substitution replacements live on different charts");
  return Expression(substitute_node(e.root_ptr(), replacements), replacements.front().chart(),
                    e.params());
}

Expression differentiate(const Expression& e, int index) {
  const Node& n = e.root();
  auto sub = [&](const NodePtr& child) { return Expression(child, e.chart(), e.params()); };
  auto zero = [&] { return Expression(make_constant(0), e.chart(), e.params()); };
  switch (n.op) {
    case Op::Constant:
    case Op::Parameter:
      return zero();
    case Op::Variable:
      return Expression(make_constant(n.index == index ? 1 : 0), e.chart(), e.params());
    case Op::Add:
      return differentiate(sub(n.lhs), index) + differentiate(sub(n.rhs), index);
    case Op::Sub:
      return differentiate(sub(n.lhs), index) - differentiate(sub(n.rhs), index);
    case Op::Mul:
      return differentiate(sub(n.lhs), index) * sub(n.rhs) +
             sub(n.lhs) * differentiate(sub(n.rhs), index);
    case Op::Div: {
      const Expression a = sub(n.lhs), b = sub(n.rhs);
      const Expression da = differentiate(a, index), db = differentiate(b, index);
      if (is_zero(db)) return da / b;
      return (da * b - a * db) / pow(b, 2);
    }
    case Op::Neg:
      return -differentiate(sub(n.lhs), index);
    case Op::Pow: {
      const Expression base = sub(n.lhs);
      return constant(e.chart(), n.exponent) * pow(base, n.exponent - 1) *
             differentiate(base, index);
    }
  }
  throw ShapeError("corrupt expression node");
}

Expression rebind(const Expression& e, ChartPtr chart) {
  if (!(*chart == *e.chart())) throw ShapeError("rebind to a different chart");
  return Expression(e.root_ptr(), std::move(chart), e.params());
}

}  // namespace haantjes
