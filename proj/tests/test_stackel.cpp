#include <doctest.h>

#include <cmath>
#include <optional>
#include <random>

#include "haantjes/error.hpp"
#include "haantjes/polynomial.hpp"
#include "haantjes/stackel.hpp"
#include "models.hpp"
#include "oracles.hpp"
#include "random_stackel.hpp"

using namespace haantjes;

namespace {

StackelSpec example_spec() {
  auto c = models::stackel_chart();
  auto p = [&](const char* s) { return parse(s, c); };
  return {c,
          {{p("q1*q2"), p("0"), p("0")}, {p("0"), p("1"), p("q3")}, {p("q4"), p("0"), p("1")}},
          {p("q1*q2*(p1^2 + p2^2 + q1*q2)"), p("p3^2 + q3"), p("p4^2 + q4")},
          false};
}

SampleSet samples_for(const StackelSystem& sys, const Chart& c, int count = 32) {
  SampleConfig cfg;
  cfg.count = count;
  return admissible_samples(c, cfg, sys.guards());
}

}  // namespace

TEST_CASE("worked (2,1,1) system from its Staeckel data") {
  const auto spec = example_spec();
  const auto sys = build_system(spec, 2);
  CHECK(print(sys.det) == "q1*q2");
  CHECK(print(sys.hamiltonians[0]) == "p1^2 + p2^2 + q1*q2");
  CHECK(print(sys.operators[0](0, 0)) == "1/(q3*q4)");
  CHECK(print(sys.operators[2](0, 0)) == "-1/q3");
  CHECK(print(sys.operators[2](2, 2)) == "0");

  const auto expected = models::stackel_hamiltonians(spec.chart);
  const auto k1 = models::stackel_K1(spec.chart), k3 = models::stackel_K3(spec.chart);
  const auto s = samples_for(sys, *spec.chart);
  for (const auto& x : s.points) {
    for (int a = 0; a < 3; ++a)
      CHECK(std::abs(eval(sys.hamiltonians[a], x) - eval(expected[a], x)) <=
            1e-12 * (1 + std::abs(eval(expected[a], x))));
    CHECK((sys.operators[0].value(x) - k1.value(x)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((sys.operators[2].value(x) - k3.value(x)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((sys.operators[1].value(x) - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() == 0.0);
  }
  const auto report = verify_system(spec, sys, s);
  CHECK_MESSAGE(report.passed(), report.summary());
  CHECK(validate_spec(spec, s).passed());
}

TEST_CASE("separation residuals at the unit point") {
  const auto spec = example_spec();
  const std::vector<double> x(8, 1.0), h{3, 3, -1};
  for (double r : separation_residuals(spec, h, x)) CHECK(std::abs(r) <= 1e-12);
  const auto sys = build_system(spec, 2);
  for (int a = 0; a < 3; ++a) CHECK(eval(sys.hamiltonians[a], x) == doctest::Approx(h[a]));
  CHECK_THROWS_AS(separation_residuals(spec, std::vector<double>{1, 2}, x), ShapeError);
}

TEST_CASE("generator with a structurally zero adjugate entry is rejected") {
  auto c = models::stackel_chart();
  StackelSpec spec{c,
                   {{parse("1", c), parse("0", c), parse("0", c)},
                    {parse("0", c), parse("1", c), parse("0", c)},
                    {parse("0", c), parse("0", c), parse("1", c)}},
                   {parse("p1^2 + p2^2", c), parse("p3^2", c), parse("p4^2", c)},
                   false};
  CHECK_THROWS_WITH_AS(build_system(spec, 1), doctest::Contains("different generator"),
                       ConstructionError);
  // without operators the Hamiltonians are still the f_a
  const auto sys = build_system(spec, 0);
  CHECK(sys.operators.empty());
  CHECK(print(sys.hamiltonians[2]) == "p4^2");
}

TEST_CASE("row locality violations name the entry and variable") {
  auto spec = example_spec();
  spec.matrix[0][1] = parse("q3", spec.chart);
  CHECK_THROWS_WITH_AS(check_locality(spec), doctest::Contains("S12 = q3 depends on q3"),
                       ConstructionError);
  spec = example_spec();
  spec.matrix[1][1] = parse("1 + p3", spec.chart);
  CHECK_THROWS_WITH_AS(check_locality(spec), doctest::Contains("a momentum"), ConstructionError);
  spec.momentum_rows = true;
  CHECK_NOTHROW(check_locality(spec));
  spec = example_spec();
  spec.vector[2] = parse("p4^2 + q1", spec.chart);
  CHECK_THROWS_WITH_AS(check_locality(spec), doctest::Contains("f3"), ConstructionError);
  spec = example_spec();
  spec.vector.pop_back();
  CHECK_THROWS_AS(check_locality(spec), ShapeError);
}

TEST_CASE("adjugate solve agrees with the explicit cofactor formulas") {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto spec = models::random_spec(rng, {2, 1, 1});
    if (identically_zero(determinant(spec.matrix))) continue;
    const auto sys = build_system(spec, 0);
    SampleConfig cfg;
    cfg.count = 8;
    cfg.seed = 100 + trial;
    const auto s = admissible_samples(*spec.chart, cfg, sys.guards());
    for (const auto& x : s.points) {
      const auto ref = oracles::closed_form(spec, x);
      for (int a = 0; a < 3; ++a)
        CHECK(std::abs(eval(sys.hamiltonians[a], x) - ref[a]) <= 1e-9 * (1 + std::abs(ref[a])));
    }
    ++checked;
  }
  CHECK(checked >= 15);
}

TEST_CASE("random specs give T-involutive systems with chains") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 6; ++trial) {
    const std::vector<int> blocks = trial % 2 ? std::vector<int>{2, 1} : std::vector<int>{1, 2, 1};
    const auto spec = models::random_spec(rng, blocks);
    std::optional<StackelSystem> sys;
    try {
      sys = build_system(spec, 1);
    } catch (const ConstructionError&) {
      continue;
    }
    const auto s = samples_for(*sys, *spec.chart, 16);
    const auto report = verify_system(spec, *sys, s);
    CHECK_MESSAGE(report.passed(), report.summary());
  }
}

TEST_CASE("reduced system on the Darboux-Haantjes chart") {
  auto c = models::dh_chart();
  const auto h = models::dh_hamiltonians(c);
  StackelSpec spec{c,
                   {{parse("1", c), parse("-2", c)}, {parse("0", c), parse("1", c)}},
                   {canonicalize(h[0] - parse("2", c) * h[2]), h[2]},
                   false};
  CHECK(print(spec.vector[0]) == "2*p1^2 + 2*p2^2 + 4*q1^2 + 8*q1*q2 + 4*q2^2");
  const auto sys = build_system(spec, 1);
  CHECK(structurally_equal(sys.hamiltonians[1], canonicalize(h[2])));
  const auto s = samples_for(sys, *c, 16);
  for (const auto& x : s.points) CHECK(eval(sys.hamiltonians[0], x) == doctest::Approx(eval(h[0], x)));
  CHECK(verify_system(spec, sys, s).passed());
}

TEST_CASE("classic Staeckel matrices") {
  auto c = make_chart({1, 1});
  std::vector<std::vector<Expression>> s{{parse("q1^2", c), parse("1", c)},
                                         {parse("q2^2", c), parse("1", c)}};
  std::vector<Expression> f{parse("p1^2/2", c), parse("p2^2/2", c)};
  const auto sys = build_akn(c, s, f);
  CHECK(sys.generator == 1);
  CHECK(print(sys.det) == "q1^2 - q2^2");
  const auto samples = samples_for(sys, *c, 16);
  CHECK(verify_system(StackelSpec{c, s, f, false}, sys, samples).passed());
  CHECK_THROWS_AS(build_akn(make_chart({2}), {{parse("1", c)}}, {parse("p1^2", c)}), ShapeError);
}

TEST_CASE("symmetry of the separation relations") {
  auto c = models::dh_chart();
  const std::vector<std::string> hs{"h1", "h2", "h3"};
  std::vector<Expression> se{parse("2*(p1^2 + p2^2) + 4*(q1+q2)^2 - h1", c, hs),
                             parse("p1 - p2 - h2", c, hs), parse("p3^2 + 2*q3 - h3", c, hs)};
  const auto h = models::dh_hamiltonians(c);
  std::vector<Expression> level{canonicalize(h[0] - parse("2", c) * h[2]), h[1], h[2]};
  SampleConfig cfg;
  cfg.count = 32;
  std::vector<Expression> guards{parse("p1 + p2", c), parse("p3", c)};
  const auto s = admissible_samples(*c, cfg, guards);
  CHECK(symmetry_check(se, level, {}, s).passed());

  auto flat = make_chart({1, 1});
  std::vector<Expression> separated{parse("p1^2 + q1^2 - h1", flat, {"h1", "h2"}),
                                    parse("p2^2*q2 + h1*q2 - h2", flat, {"h1", "h2"})};
  std::vector<Expression> coupled{parse("p1^2 + q1*q2", flat), parse("p2^2 + q2", flat)};
  SampleConfig fc;
  fc.count = 32;
  std::vector<Expression> fg{parse("p1", flat), parse("p2", flat), parse("q2", flat)};
  const auto fs = admissible_samples(*flat, fc, fg);
  const std::vector<double> fixed{0.5, 1.5};
  CHECK(symmetry_check(separated, {}, fixed, fs).passed());
  const auto bad = symmetry_check(coupled, {}, {}, fs);
  CHECK_FALSE(bad.passed());
  CHECK(bad.max_residual() > 1e-3);

  const std::vector<double> x{0.3, 0.2, 0.0, 0.0};
  CHECK_THROWS_AS(symmetry_condition(coupled, x), EvalError);
}
