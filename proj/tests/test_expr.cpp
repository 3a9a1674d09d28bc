#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <string>

#include "haantjes/error.hpp"
#include "haantjes/expr.hpp"
#include "haantjes/polynomial.hpp"

using namespace haantjes;

namespace {

const char* kH1 =
    "4*p1^2 + 2*p2^2 + 4*p3^2 + q1*(q1+2) + 4*q2^2 + q3*(q3-2) + 4*q1*q2 + 2*q1*q3 + 4*q2*q3";

// Random text in the input grammar, including things the printer never emits
// (redundant parentheses, nested negation, decimals).
std::string random_text(std::mt19937_64& rng, int depth) {
  auto pick = [&](int k) { return static_cast<int>(rng() % k); };
  if (depth <= 0 || pick(4) == 0) {
    switch (pick(5)) {
      case 0: return std::to_string(pick(9) + 1);
      case 1: return "0.25";
      case 2: return "q" + std::to_string(pick(2) + 1);
      default: return "p" + std::to_string(pick(2) + 1);
    }
  }
  std::string a = random_text(rng, depth - 1);
  std::string b = random_text(rng, depth - 1);
  switch (pick(7)) {
    case 0: return a + " + " + b;
    case 1: return a + " - " + b;
    case 2: return "(" + a + ")*(" + b + ")";
    case 3: return "(" + a + ")/(" + b + ")";
    case 4: return "(" + a + ")^" + std::to_string(pick(4));
    case 5: return "-(" + a + ")";
    default: return "(" + a + ")*" + b;
  }
}

}  // namespace

TEST_CASE("parse resolves variables of the chart") {
  auto chart = make_chart({2});
  auto e = parse("q1*q2 + p1^2", chart);
  CHECK(variables(e) == std::vector<int>{0, 1, 2});
  CHECK(print(e) == "q1*q2 + p1^2");
}

TEST_CASE("unknown variable and syntax errors") {
  auto chart = make_chart({2});
  CHECK_THROWS_WITH_AS(parse("q5", chart), doctest::Contains("unknown variable 'q5'"), ParseError);
  CHECK_THROWS_AS(parse("q1 +", chart), ParseError);
  CHECK_THROWS_AS(parse("q1 * (p1", chart), ParseError);
  CHECK_THROWS_AS(parse("q1 $ p1", chart), ParseError);
  try {
    parse("q1 + + ", chart);
    FAIL("expected a parse error");
  } catch (const ParseError& err) {
    CHECK(err.position() >= 3);
  }
}

TEST_CASE("block aliases map to declared order") {
  auto chart = make_chart({2, 1});
  auto a = parse("q1_2*p2_1", chart);
  auto b = parse("q2*p3", chart);
  CHECK(structurally_equal(a, b));
}

TEST_CASE("H1 and H2 of the completely integrable example at (0,0,0,1,0,1)") {
  auto chart = make_chart({3});
  const std::vector<double> x{0, 0, 0, 1, 0, 1};
  CHECK(eval(parse(kH1, chart), x) == 8.0);
  CHECK(eval(parse("p1 - p2 + p3", chart), x) == 2.0);
}

TEST_CASE("pole reports the failing subexpression") {
  auto chart = make_chart({3});
  auto e = parse("1/(p1+p3)", chart);
  const std::vector<double> x{0, 0, 0, 1, 0, -1};
  CHECK_THROWS_WITH_AS(eval(e, x), doctest::Contains("division by zero in 'p1 + p3'"), EvalError);
  CHECK_THROWS_AS(jet2(e, x), EvalError);
  CHECK_THROWS_AS(eval(parse("p1^-2", chart), std::vector<double>{0, 0, 0, 0, 0, 0}), EvalError);
}

TEST_CASE("bilinear jet") {
  auto chart = make_chart({2});
  auto e = parse("q1*p1", chart);
  const std::vector<double> x{0.3, -1.2, 2.5, 0.7};
  auto j = jet2(e, x);
  CHECK(j.value == doctest::Approx(0.75));
  CHECK(j.gradient == std::vector<double>{2.5, 0, 0.3, 0});
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      CHECK(j.hessian(a, b) == (((a == 0 && b == 2) || (a == 2 && b == 0)) ? 1.0 : 0.0));
}

TEST_CASE("gradient of H1 against central differences") {
  auto chart = make_chart({3});
  auto e = parse(kH1, chart);
  std::vector<double> x{0, 0, 0, 1, 0, 1};
  auto j = jet1(e, x);
  const double h = 1e-5;
  for (int i = 0; i < 6; ++i) {
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fd = (eval(e, xp) - eval(e, xm)) / (2 * h);
    if (j.gradient[i] != 0.0)
      CHECK(std::abs(fd - j.gradient[i]) <= 1e-6 * std::abs(j.gradient[i]));
    else
      CHECK(std::abs(fd) <= 1e-6);
  }
}

TEST_CASE("hessian of a quadratic is constant") {
  auto chart = make_chart({3});
  auto e = parse(kH1, chart);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2, 2);
  std::vector<double> x0(6);
  for (auto& v : x0) v = u(rng);
  const auto ref = jet2(e, x0).hessian_matrix();
  for (int s = 0; s < 10; ++s) {
    std::vector<double> x(6);
    for (auto& v : x) v = u(rng);
    CHECK(jet2(e, x).hessian_matrix() == ref);
  }
}

TEST_CASE("AD matches finite differences on random rational expressions") {
  auto chart = make_chart({2});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto e = parse(random_text(rng, 4), chart);
    std::vector<double> x(4);
    for (auto& v : x) v = u(rng);
    Jet2 j;
    try {
      j = jet2(e, x);
    } catch (const EvalError&) {
      continue;
    }
    if (!std::isfinite(j.value) || std::abs(j.value) > 1e6) continue;
    // Central differences are not a trustworthy oracle next to a pole.
    bool steep = false;
    for (double g : j.gradient) steep = steep || std::abs(g) > 1e3;
    if (steep) continue;
    const double h = 1e-5;
    bool ok = true;
    for (int i = 0; i < 4 && ok; ++i) {
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      double fp, fm;
      try {
        fp = eval(e, xp);
        fm = eval(e, xm);
      } catch (const EvalError&) {
        ok = false;
        break;
      }
      const double fd = (fp - fm) / (2 * h);
      const double g = j.gradient[i];
      // Loose absolute floor for components that are zero or tiny.
      if (std::abs(g) > 1e-3) {
        CHECK(std::abs(fd - g) <= 1e-6 * std::abs(g) + 1e-9 * std::abs(j.value) + 1e-8);
      } else {
        CHECK(std::abs(fd - g) <= 1e-6);
      }
    }
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        const double hab = j.hessian(a, b), hba = j.hessian(b, a);
        CHECK(std::memcmp(&hab, &hba, sizeof(double)) == 0);
      }
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("parse . print . parse is the identity on ASTs") {
  auto chart = make_chart({2});
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::string text = random_text(rng, 5);
    auto first = parse(text, chart);
    auto second = parse(print(first), chart);
    INFO(text);
    INFO(print(first));
    CHECK(structurally_equal(first, second));
    CHECK(print(second) == print(first));
  }
}

TEST_CASE("printer forms") {
  auto chart = make_chart({2});
  CHECK(print(parse("q1 - (q2 - p1)", chart)) == "q1 - (q2 - p1)");
  CHECK(print(parse("-q1^2", chart)) == "-q1^2");
  CHECK(print(parse("(q1+q2)^3", chart)) == "(q1 + q2)^3");
  CHECK(print(parse("1/4*q1", chart)) == "(1/4)*q1");
  CHECK(print(parse("0.5*q1", chart)) == "(1/2)*q1");
  CHECK(print(parse("q1/(q2*p1)", chart)) == "q1/(q2*p1)");
}

TEST_CASE("symbolic derivative agrees with AD") {
  auto chart = make_chart({3});
  auto e = parse("(q1*p2 - 3)/(p1+p3)^2 + q2^3", chart);
  const std::vector<double> x{0.4, -0.8, 1.1, 0.9, -0.2, 0.5};
  auto j = jet1(e, x);
  for (int i = 0; i < 6; ++i)
    CHECK(eval(differentiate(e, i), x) == doctest::Approx(j.gradient[i]).epsilon(1e-13));
}

TEST_CASE("parameters are constants under differentiation") {
  auto chart = make_chart({1});
  auto e = parse("p1^2 + h1*q1", chart, {"h1"});
  const std::vector<double> x{2.0, 3.0};
  const std::vector<double> h{5.0};
  auto j = jet1(e, x, h);
  CHECK(j.value == 19.0);
  CHECK(j.gradient == std::vector<double>{5.0, 6.0});
}

TEST_CASE("substitution composes with evaluation") {
  auto chart = make_chart({1});
  auto e = parse("q1*p1 + q1^2", chart);
  std::vector<Expression> sub{parse("q1 + p1", chart), parse("2*p1", chart)};
  auto s = substitute(e, sub);
  const std::vector<double> x{0.5, -1.5};
  CHECK(eval(s, x) == doctest::Approx((0.5 - 1.5) * (-3.0) + 1.0));
}

TEST_CASE("canonical polynomial printing") {
  auto chart = make_chart({2, 1, 1});
  auto num = parse("q1*q2*(p1^2 + p2^2 + q1*q2)", chart);
  auto den = parse("q1*q2", chart);
  CHECK(print(canonical_quotient(num, den)) == "p1^2 + p2^2 + q1*q2");
  CHECK(print(canonicalize(parse("(q1+1)^2 - 1", chart))) == "q1^2 + 2*q1");
  CHECK(identically_zero(parse("(q1+p1)^2 - q1^2 - 2*q1*p1 - p1^2", chart)));
  CHECK_FALSE(identically_zero(parse("q1*q2 - q2*q1 + 1/q3", chart)));
}
