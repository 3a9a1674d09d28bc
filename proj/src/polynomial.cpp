#include "haantjes/polynomial.hpp"

#include <algorithm>

namespace haantjes {

namespace {

int degree(const Polynomial::Monomial& m) {
  int d = 0;
  for (int e : m) d += e;
  return d;
}

// Momenta, then positions, then parameters.
int priority_slot(int rank, int n, int nvars) {
  if (rank < n) return n + rank;
  if (rank < 2 * n) return rank - n;
  (void)nvars;
  return rank;
}

}  // namespace

bool Polynomial::Order::operator()(const Monomial& a, const Monomial& b) const {
  const int da = degree(a), db = degree(b);
  if (da != db) return da > db;
  const int nvars = static_cast<int>(a.size());
  for (int rank = 0; rank < nvars; ++rank) {
    const int v = priority_slot(rank, n, nvars);
    if (a[v] != b[v]) return a[v] > b[v];
  }
  return false;
}

Polynomial::Polynomial(int n, int nvars) : n_(n), nvars_(nvars), terms_(Order{n}) {}

Polynomial Polynomial::constant(int n, int nvars, const Rational& c) {
  Polynomial p(n, nvars);
  p.add_term(Monomial(nvars, 0), c);
  return p;
}

Polynomial Polynomial::variable(int n, int nvars, int index) {
  Polynomial p(n, nvars);
  Monomial m(nvars, 0);
  m[index] = 1;
  p.add_term(m, 1);
  return p;
}

void Polynomial::add_term(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

std::optional<Rational> Polynomial::constant_value() const {
  if (terms_.empty()) return Rational(0);
  if (terms_.size() == 1 && degree(terms_.begin()->first) == 0) return terms_.begin()->second;
  return std::nullopt;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial out = *this;
  for (const auto& [m, c] : o.terms_) out.add_term(m, c);
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  Polynomial out = *this;
  for (const auto& [m, c] : o.terms_) out.add_term(m, -c);
  return out;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial out(n_, nvars_);
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : o.terms_) {
      Monomial m(nvars_);
      for (int v = 0; v < nvars_; ++v) m[v] = ma[v] + mb[v];
      out.add_term(m, ca * cb);
    }
  return out;
}

Polynomial Polynomial::operator-() const { return scaled(-1); }

Polynomial Polynomial::scaled(const Rational& c) const {
  Polynomial out(n_, nvars_);
  for (const auto& [m, coeff] : terms_) out.add_term(m, coeff * c);
  return out;
}

Polynomial Polynomial::pow(int k) const {
  Polynomial out = constant(n_, nvars_, 1);
  for (int i = 0; i < k; ++i) out = out * *this;
  return out;
}

std::optional<Polynomial> Polynomial::divide_exact(const Polynomial& divisor) const {
  if (divisor.is_zero()) return std::nullopt;
  const auto& [lead_m, lead_c] = *divisor.terms_.begin();
  Polynomial quotient(n_, nvars_);
  Polynomial rest = *this;
  while (!rest.is_zero()) {
    const auto& [m, c] = *rest.terms_.begin();
    Monomial t(nvars_);
    for (int v = 0; v < nvars_; ++v) {
      t[v] = m[v] - lead_m[v];
      if (t[v] < 0) return std::nullopt;
    }
    Polynomial step(n_, nvars_);
    step.add_term(t, c / lead_c);
    quotient = quotient + step;
    rest = rest - step * divisor;
  }
  return quotient;
}

Polynomial::Monomial Polynomial::monomial_content() const {
  Monomial g(nvars_, 0);
  if (terms_.empty()) return g;
  g = terms_.begin()->first;
  for (const auto& [m, c] : terms_)
    for (int v = 0; v < nvars_; ++v) g[v] = std::min(g[v], m[v]);
  return g;
}

Polynomial Polynomial::divide_monomial(const Monomial& d) const {
  Polynomial out(n_, nvars_);
  for (const auto& [m, c] : terms_) {
    Monomial r(nvars_);
    for (int v = 0; v < nvars_; ++v) r[v] = m[v] - d[v];
    out.add_term(r, c);
  }
  return out;
}

namespace {

std::optional<Polynomial> convert(const Node& node, int n, int nvars, int dim) {
  switch (node.op) {
    case Op::Constant:
      return Polynomial::constant(n, nvars, node.constant);
    case Op::Variable:
      return Polynomial::variable(n, nvars, node.index);
    case Op::Parameter:
      return Polynomial::variable(n, nvars, dim + node.index);
    case Op::Neg: {
      auto a = convert(*node.lhs, n, nvars, dim);
      if (!a) return std::nullopt;
      return -*a;
    }
    case Op::Pow: {
      auto a = convert(*node.lhs, n, nvars, dim);
      if (!a) return std::nullopt;
      if (node.exponent >= 0) return a->pow(node.exponent);
      auto c = a->constant_value();
      if (!c || *c == 0) return std::nullopt;
      Rational r = 1;
      for (int k = 0; k < -node.exponent; ++k) r /= *c;
      return Polynomial::constant(n, nvars, r);
    }
    default: {
      auto a = convert(*node.lhs, n, nvars, dim);
      if (!a) return std::nullopt;
      auto b = convert(*node.rhs, n, nvars, dim);
      if (!b) return std::nullopt;
      switch (node.op) {
        case Op::Add:
          return *a + *b;
        case Op::Sub:
          return *a - *b;
        case Op::Mul:
          return *a * *b;
        case Op::Div: {
          if (auto c = b->constant_value()) {
            if (*c == 0) return std::nullopt;
            return a->scaled(1 / *c);
          }
          return a->divide_exact(*b);
        }
        default:
          return std::nullopt;
      }
    }
  }
}

std::string coefficient_text(const Rational& c) {
  if (boost::multiprecision::denominator(c) == 1) return c.str();
  return "(" + c.str() + ")";
}

}  // namespace

std::optional<Polynomial> to_polynomial(const Expression& e) {
  const int dim = e.chart()->dim();
  return convert(e.root(), e.chart()->n(), dim + e.param_count(), dim);
}

std::string canonical_string(const Polynomial& p, const Chart& chart, const ParamNames& params) {
  if (p.is_zero()) return "0";
  const int n = chart.n();
  const int dim = chart.dim();
  std::string out;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    std::string vars;
    for (int rank = 0; rank < p.nvars(); ++rank) {
      const int v = priority_slot(rank, n, p.nvars());
      if (m[v] == 0) continue;
      if (!vars.empty()) vars += "*";
      vars += v < dim ? chart.name(v) : params->at(v - dim);
      if (m[v] > 1) vars += "^" + std::to_string(m[v]);
    }
    const Rational mag = c < 0 ? Rational(-c) : c;
    std::string body;
    if (vars.empty()) {
      body = coefficient_text(mag);
    } else if (mag == 1) {
      body = vars;
    } else {
      body = coefficient_text(mag) + "*" + vars;
    }
    if (first) {
      out = (c < 0 ? "-" : "") + body;
      first = false;
    } else {
      out += (c < 0 ? " - " : " + ") + body;
    }
  }
  return out;
}

Expression to_expression(const Polynomial& p, const ChartPtr& chart, const ParamNames& params) {
  std::vector<std::string> names = params ? *params : std::vector<std::string>{};
  Expression e = parse(canonical_string(p, *chart, params), chart, names);
  return Expression(e.root_ptr(), chart, params);
}

namespace {

Expression quotient_of(Polynomial num, Polynomial den, const ChartPtr& chart,
                       const ParamNames& params) {
  if (den.is_zero() || num.is_zero() || den.constant_value()) {
    if (den.is_zero())
      return to_expression(num, chart, params) / to_expression(den, chart, params);
    if (num.is_zero()) return constant(chart, 0);
    return to_expression(num.scaled(1 / *den.constant_value()), chart, params);
  }
  if (auto q = num.divide_exact(den)) return to_expression(*q, chart, params);
  const auto g_num = num.monomial_content();
  const auto g_den = den.monomial_content();
  Polynomial::Monomial g(g_num.size());
  for (std::size_t v = 0; v < g.size(); ++v) g[v] = std::min(g_num[v], g_den[v]);
  num = num.divide_monomial(g);
  den = den.divide_monomial(g);
  const Rational lead = den.leading_coefficient();
  num = num.scaled(1 / lead);
  den = den.scaled(1 / lead);
  if (auto c = den.constant_value()) return to_expression(num.scaled(1 / *c), chart, params);
  if (auto q = num.divide_exact(den)) return to_expression(*q, chart, params);
  if (auto q = den.divide_exact(num)) {
    // keep the leading coefficient of the remaining denominator at 1
    const Rational ql = q->leading_coefficient();
    return constant(chart, 1 / ql) / to_expression(q->scaled(1 / ql), chart, params);
  }
  return to_expression(num, chart, params) / to_expression(den, chart, params);
}

}  // namespace

Expression canonical_quotient(const Expression& num, const Expression& den) {
  auto pn = to_polynomial(num);
  auto pd = to_polynomial(den);
  if (!pn || !pd) return num / den;
  const ParamNames params = num.param_count() ? num.params() : den.params();
  Expression out = quotient_of(*pn, *pd, num.chart(), params);
  return Expression(out.root_ptr(), num.chart(), params);
}

Expression canonicalize(const Expression& e) {
  if (auto p = to_polynomial(e)) return to_expression(*p, e.chart(), e.params());
  if (e.root().op == Op::Div) {
    Expression num(e.root().lhs, e.chart(), e.params());
    Expression den(e.root().rhs, e.chart(), e.params());
    if (to_polynomial(num) && to_polynomial(den)) return canonical_quotient(num, den);
  }
  return e;
}

bool identically_zero(const Expression& e) {
  if (auto p = to_polynomial(e)) return p->is_zero();
  if (e.root().op == Op::Div) {
    Expression num(e.root().lhs, e.chart(), e.params());
    if (auto p = to_polynomial(num)) return p->is_zero();
  }
  return is_zero(e);
}

}  // namespace haantjes
