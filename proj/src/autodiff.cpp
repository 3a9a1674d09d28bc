// Forward-mode evaluation of expression trees as truncated Taylor numbers.
// The same recursive walker runs on plain doubles, first-order jets and
// second-order (hyper-dual) jets.

#include <cmath>
#include <string>

#include "haantjes/expr.hpp"

namespace haantjes {

namespace {

inline int packed(int i, int j, int dim) { return i * dim - i * (i - 1) / 2 + (j - i); }

struct Context {
  const Chart& chart;
  const ParamNames& params;
  std::span<const double> x;
  std::span<const double> p;
};

[[noreturn]] void pole(const Node& where, const Context& ctx, const char* what) {
  Expression sub(std::shared_ptr<const Node>(std::shared_ptr<const Node>{}, &where),
                 std::make_shared<const Chart>(ctx.chart), ctx.params);
  std::string msg = std::string(what) + " in '" + print(sub) + "'";
  if (where.position >= 0) msg += " at position " + std::to_string(where.position);
  throw EvalError(msg);
}

struct Scalar {
  using T = double;
  static T constant(double c, int) { return c; }
  static T variable(int, double v, int) { return v; }
  static double value(const T& a) { return a; }
  static T add(const T& a, const T& b) { return a + b; }
  static T sub(const T& a, const T& b) { return a - b; }
  static T mul(const T& a, const T& b) { return a * b; }
  static T div(const T& a, const T& b) { return a / b; }
  static T neg(const T& a) { return -a; }
  static T powi(const T& a, int k) {
    T result = 1.0;
    T base = k < 0 ? 1.0 / a : a;
    for (unsigned e = static_cast<unsigned>(std::abs(k)); e; e >>= 1) {
      if (e & 1u) result *= base;
      base *= base;
    }
    return result;
  }
};

struct First {
  using T = Jet1;
  static T constant(double c, int dim) { return {c, std::vector<double>(dim, 0.0)}; }
  static T variable(int index, double v, int dim) {
    T out = constant(v, dim);
    out.gradient[index] = 1.0;
    return out;
  }
  static double value(const T& a) { return a.value; }
  static T add(const T& a, const T& b) {
    T out{a.value + b.value, a.gradient};
    for (std::size_t i = 0; i < out.gradient.size(); ++i) out.gradient[i] += b.gradient[i];
    return out;
  }
  static T sub(const T& a, const T& b) {
    T out{a.value - b.value, a.gradient};
    for (std::size_t i = 0; i < out.gradient.size(); ++i) out.gradient[i] -= b.gradient[i];
    return out;
  }
  static T mul(const T& a, const T& b) {
    T out{a.value * b.value, std::vector<double>(a.gradient.size())};
    for (std::size_t i = 0; i < out.gradient.size(); ++i)
      out.gradient[i] = a.value * b.gradient[i] + b.value * a.gradient[i];
    return out;
  }
  static T div(const T& a, const T& b) {
    const double r = 1.0 / b.value;
    T out{a.value * r, std::vector<double>(a.gradient.size())};
    for (std::size_t i = 0; i < out.gradient.size(); ++i)
      out.gradient[i] = (a.gradient[i] - out.value * b.gradient[i]) * r;
    return out;
  }
  static T neg(const T& a) {
    T out{-a.value, a.gradient};
    for (double& g : out.gradient) g = -g;
    return out;
  }
  static T powi(const T& a, int k) {
    const double f = Scalar::powi(a.value, k);
    const double df = k == 0 ? 0.0 : k * Scalar::powi(a.value, k - 1);
    T out{f, a.gradient};
    for (double& g : out.gradient) g *= df;
    return out;
  }
};

struct Second {
  using T = Jet2;
  static T constant(double c, int dim) {
    T out;
    out.value = c;
    out.dim = dim;
    out.gradient.assign(dim, 0.0);
    out.upper.assign(dim * (dim + 1) / 2, 0.0);
    return out;
  }
  static T variable(int index, double v, int dim) {
    T out = constant(v, dim);
    out.gradient[index] = 1.0;
    return out;
  }
  static double value(const T& a) { return a.value; }
  static T add(const T& a, const T& b) {
    T out = a;
    out.value += b.value;
    for (int i = 0; i < a.dim; ++i) out.gradient[i] += b.gradient[i];
    for (std::size_t i = 0; i < out.upper.size(); ++i) out.upper[i] += b.upper[i];
    return out;
  }
  static T sub(const T& a, const T& b) {
    T out = a;
    out.value -= b.value;
    for (int i = 0; i < a.dim; ++i) out.gradient[i] -= b.gradient[i];
    for (std::size_t i = 0; i < out.upper.size(); ++i) out.upper[i] -= b.upper[i];
    return out;
  }
  static T mul(const T& a, const T& b) {
    const int n = a.dim;
    T out = constant(a.value * b.value, n);
    for (int i = 0; i < n; ++i) out.gradient[i] = a.value * b.gradient[i] + b.value * a.gradient[i];
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const int k = packed(i, j, n);
        out.upper[k] = a.value * b.upper[k] + b.value * a.upper[k] +
                       a.gradient[i] * b.gradient[j] + b.gradient[i] * a.gradient[j];
      }
    return out;
  }
  // 1/b as a unary map with f' = -1/b^2, f'' = 2/b^3, then a * (1/b).
  static T div(const T& a, const T& b) {
    const double r = 1.0 / b.value;
    return mul(a, chain(b, r, -r * r, 2.0 * r * r * r));
  }
  static T neg(const T& a) {
    T out = a;
    out.value = -a.value;
    for (double& g : out.gradient) g = -g;
    for (double& h : out.upper) h = -h;
    return out;
  }
  static T powi(const T& a, int k) {
    const double f = Scalar::powi(a.value, k);
    const double df = k == 0 ? 0.0 : k * Scalar::powi(a.value, k - 1);
    const double ddf = (k == 0 || k == 1) ? 0.0 : k * (k - 1) * Scalar::powi(a.value, k - 2);
    return chain(a, f, df, ddf);
  }
  static T chain(const T& a, double f, double df, double ddf) {
    const int n = a.dim;
    T out = constant(f, n);
    for (int i = 0; i < n; ++i) out.gradient[i] = df * a.gradient[i];
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const int k = packed(i, j, n);
        out.upper[k] = df * a.upper[k] + ddf * a.gradient[i] * a.gradient[j];
      }
    return out;
  }
};

template <class Num>
typename Num::T walk(const Node& n, const Context& ctx) {
  const int dim = static_cast<int>(ctx.x.size());
  switch (n.op) {
    case Op::Constant:
      return Num::constant(n.numeric, dim);
    case Op::Variable:
      return Num::variable(n.index, ctx.x[n.index], dim);
    case Op::Parameter:
      if (n.index >= static_cast<int>(ctx.p.size()))
        throw ShapeError("no value bound for parameter " + std::to_string(n.index + 1));
      return Num::constant(ctx.p[n.index], dim);
    case Op::Add:
      return Num::add(walk<Num>(*n.lhs, ctx), walk<Num>(*n.rhs, ctx));
    case Op::Sub:
      return Num::sub(walk<Num>(*n.lhs, ctx), walk<Num>(*n.rhs, ctx));
    case Op::Mul:
      return Num::mul(walk<Num>(*n.lhs, ctx), walk<Num>(*n.rhs, ctx));
    case Op::Div: {
      auto num = walk<Num>(*n.lhs, ctx);
      auto den = walk<Num>(*n.rhs, ctx);
      if (Num::value(den) == 0.0) pole(*n.rhs, ctx, "division by zero");
      return Num::div(num, den);
    }
    case Op::Neg:
      return Num::neg(walk<Num>(*n.lhs, ctx));
    case Op::Pow: {
      auto base = walk<Num>(*n.lhs, ctx);
      if (n.exponent < 0 && Num::value(base) == 0.0)
        pole(*n.lhs, ctx, "negative power of zero");
      return Num::powi(base, n.exponent);
    }
  }
  throw EvalError("corrupt expression node");
}

template <class Num>
typename Num::T run(const Expression& e, std::span<const double> x, std::span<const double> p) {
  if (static_cast<int>(x.size()) != e.chart()->dim())
    throw ShapeError("point dimension " + std::to_string(x.size()) + " does not match chart " +
                     std::to_string(e.chart()->dim()));
  const Context ctx{*e.chart(), e.params(), x, p};
  return walk<Num>(e.root(), ctx);
}

}  // namespace

double Jet2::hessian(int i, int j) const {
  return i <= j ? upper[packed(i, j, dim)] : upper[packed(j, i, dim)];
}

std::vector<double> Jet2::hessian_matrix() const {
  std::vector<double> out(static_cast<std::size_t>(dim) * dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) out[i * dim + j] = out[j * dim + i] = upper[packed(i, j, dim)];
  return out;
}

double eval(const Expression& e, std::span<const double> x, std::span<const double> params) {
  return run<Scalar>(e, x, params);
}

double eval(const Expression& e, const Point& x, std::span<const double> params) {
  return run<Scalar>(e, x.coords(), params);
}

Jet1 jet1(const Expression& e, std::span<const double> x, std::span<const double> params) {
  return run<First>(e, x, params);
}

Jet2 jet2(const Expression& e, std::span<const double> x, std::span<const double> params) {
  return run<Second>(e, x, params);
}

Jet2 jet2(const Expression& e, const Point& x, std::span<const double> params) {
  return run<Second>(e, x.coords(), params);
}

}  // namespace haantjes
