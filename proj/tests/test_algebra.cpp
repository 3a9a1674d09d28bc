#include <doctest.h>

#include <cmath>
#include <random>

#include "haantjes/algebra.hpp"
#include "models.hpp"

using namespace haantjes;

namespace {

SampleSet raw_samples(const ChartPtr& c, int count) {
  SampleConfig cfg;
  cfg.count = count;
  cfg.guard_min = 0.1;
  std::vector<Expression> guards{parse("p1+p3", c)};
  return admissible_samples(*c, cfg, guards);
}

SampleSet stackel_samples(const ChartPtr& c, int count) {
  SampleConfig cfg;
  cfg.count = count;
  std::vector<Expression> guards{parse("q3", c), parse("q4", c), parse("q1*q2", c)};
  return admissible_samples(*c, cfg, guards);
}

}  // namespace

TEST_CASE("spectrum of L2 at p1 = p3 = 1") {
  auto c = models::raw_chart();
  const std::vector<double> x{0.3, -0.4, 0.8, 1, 0.5, 1};
  const auto s = spectrum_at(models::raw_L2(c), x);
  REQUIRE(s.clusters.size() == 2);
  CHECK(s.clusters[0].value.real() == doctest::Approx(0.0).scale(1).epsilon(1e-10));
  CHECK(s.clusters[0].algebraic_multiplicity == 2);
  CHECK(s.clusters[0].riesz_index == 1);
  CHECK(s.clusters[1].value.real() == doctest::Approx(0.125).epsilon(1e-10));
  CHECK(s.clusters[1].algebraic_multiplicity == 4);
  CHECK(s.clusters[1].riesz_index == 2);
  CHECK(s.clusters[1].geometric_multiplicity == 2);
  CHECK(s.minimal_polynomial_degree == 3);
  CHECK(s.even_ranks);
  CHECK_FALSE(s.semisimple());
}

TEST_CASE("spectrum of L3 and identity") {
  auto c = models::raw_chart();
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  const auto s = spectrum_at(models::raw_L3(c), x);
  REQUIRE(s.clusters.size() == 2);
  CHECK(s.clusters[0].value.real() == doctest::Approx(0.0).scale(1).epsilon(1e-12));
  CHECK(s.clusters[0].algebraic_multiplicity == 4);
  CHECK(s.clusters[1].value.real() == doctest::Approx(0.5));
  CHECK(s.clusters[1].algebraic_multiplicity == 2);
  CHECK(s.minimal_polynomial_degree == 2);
  CHECK(semisimple_at(models::raw_L3(c), x));
  CHECK_FALSE(semisimple_at(models::raw_L2(c), x));

  const auto id = spectrum_at(OperatorField::identity(c), x);
  REQUIRE(id.clusters.size() == 1);
  CHECK(id.clusters[0].value == std::complex<double>(1.0, 0.0));
  CHECK(id.clusters[0].riesz_index == 1);
  CHECK(id.minimal_polynomial_degree == 1);
}

TEST_CASE("K3 of the constructed system is semisimple") {
  auto c = models::stackel_chart();
  const std::vector<double> x{0.5, 1.5, -0.7, 1.3, 0.1, 0.2, 0.3, 0.4};
  CHECK(semisimple_at(models::stackel_K3(c), x));
}

TEST_CASE("complex eigenvalues and Jordan blocks") {
  Eigen::MatrixXd rot(2, 2);
  rot << 0, -1, 1, 0;
  const auto s = spectrum_at(rot);
  REQUIRE(s.clusters.size() == 2);
  CHECK(s.clusters[0].value.imag() == doctest::Approx(-1.0));
  CHECK(s.clusters[1].value.imag() == doctest::Approx(1.0));
  CHECK(s.semisimple());
  CHECK_FALSE(s.even_ranks);  // 1-dimensional complex eigenspaces

  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(4, 4);
  j(0, 1) = 1;
  j(1, 2) = 1;
  j(3, 3) = 2;
  const auto sj = spectrum_at(j);
  REQUIRE(sj.clusters.size() == 2);
  CHECK(sj.clusters[0].riesz_index == 3);
  CHECK(sj.minimal_polynomial_degree == 4);
}

TEST_CASE("joint distributions of the completely integrable example") {
  auto c = models::raw_chart();
  HaantjesAlgebra alg(c, {OperatorField::identity(c), models::raw_L2(c), models::raw_L3(c)});
  const std::vector<double> x{0.3, -0.4, 0.8, 0.7, 0.5, 1.2};
  const auto d = joint_distributions(alg, x);
  REQUIRE(d.subspaces.size() == 2);
  CHECK(d.direct_sum);
  CHECK(d.even_ranks);
  CHECK(d.subspaces[0].rank() == 4);
  CHECK(d.subspaces[1].rank() == 2);
  // V1 = span{dq1+dq3, dq2, dp1+dp3, dp2}, V2 = span{dq1-dq3, dp1-dp3}
  Eigen::MatrixXcd v1 = Eigen::MatrixXcd::Zero(6, 4), v2 = Eigen::MatrixXcd::Zero(6, 2);
  v1(0, 0) = v1(2, 0) = 1.0;
  v1(1, 1) = 1.0;
  v1(3, 2) = v1(5, 2) = 1.0;
  v1(4, 3) = 1.0;
  v2(0, 0) = 1.0;
  v2(2, 0) = -1.0;
  v2(3, 1) = 1.0;
  v2(5, 1) = -1.0;
  CHECK(intersect_spans(d.subspaces[0].basis, v1).cols() == 4);
  CHECK(intersect_spans(d.subspaces[1].basis, v2).cols() == 2);

  HaantjesAlgebra trivial(c, {OperatorField::identity(c)});
  const auto t = joint_distributions(trivial, x);
  REQUIRE(t.subspaces.size() == 1);
  CHECK(t.subspaces[0].rank() == 6);
}

TEST_CASE("joint distributions of the constructed system") {
  auto c = models::stackel_chart();
  HaantjesAlgebra alg(c, {models::stackel_K1(c), OperatorField::identity(c), models::stackel_K3(c)});
  const auto samples = stackel_samples(c, 16);
  for (const auto& x : samples.points) {
    const auto d = joint_distributions(alg, x);
    REQUIRE(d.subspaces.size() == 3);
    CHECK(d.subspaces[0].rank() == 4);
    CHECK(d.subspaces[1].rank() == 2);
    CHECK(d.subspaces[2].rank() == 2);
    // each V_a is a coordinate block
    for (const auto& s : d.subspaces) {
      Eigen::MatrixXd mask = s.basis.cwiseAbs().rowwise().maxCoeff();
      int nonzero = 0;
      for (int i = 0; i < 8; ++i) nonzero += mask(i, 0) > 1e-8;
      CHECK(nonzero == s.rank());
    }
  }
  CHECK(joint_distribution_check(alg, samples).passed());
}

TEST_CASE("verify_algebra on both worked examples") {
  {
    auto c = models::raw_chart();
    HaantjesAlgebra alg(c, {OperatorField::identity(c), models::raw_L2(c), models::raw_L3(c)},
                        {"L1", "L2", "L3"});
    const auto r = verify_algebra(alg, raw_samples(c, 16));
    INFO(r.summary());
    CHECK(r.passed());
    CHECK(r.checks().size() == 5);
    CHECK(joint_distribution_check(alg, raw_samples(c, 16)).passed());
  }
  {
    auto c = models::stackel_chart();
    HaantjesAlgebra alg(c, {models::stackel_K1(c), OperatorField::identity(c), models::stackel_K3(c)});
    const auto r = verify_algebra(alg, stackel_samples(c, 16));
    INFO(r.summary());
    CHECK(r.passed());
  }
}

TEST_CASE("verify_algebra rejects a non-Haantjes basis element") {
  auto c = make_chart({2});
  std::mt19937_64 rng(9);
  std::vector<Expression> entries;
  for (int i = 0; i < 16; ++i)
    entries.push_back(parse(std::to_string(static_cast<int>(rng() % 5) - 2) + "*q1*p" +
                                std::to_string(1 + static_cast<int>(rng() % 2)) + " + q2",
                            c));
  HaantjesAlgebra alg(c, {OperatorField::identity(c), OperatorField(c, entries)});
  SampleConfig cfg;
  cfg.count = 8;
  const auto r = verify_algebra(alg, admissible_samples(*c, cfg));
  CHECK_FALSE(r.checks()[0].passed);
}

TEST_CASE("eigenvalue fields of L2") {
  auto c = models::raw_chart();
  std::vector<EigenCandidate> cands{{parse("1/(4*(p1+p3))", c), 4, 2}, {parse("0", c), 2, 1}};
  const auto r = eigenvalue_check(models::raw_L2(c), cands, raw_samples(c, 16), 1e-8, 3);
  INFO(r.summary());
  CHECK(r.passed());
  std::vector<EigenCandidate> wrong{{parse("1/(4*(p1+p3))", c), 4, 1}, {parse("0", c), 2, 1}};
  CHECK_FALSE(eigenvalue_check(models::raw_L2(c), wrong, raw_samples(c, 4)).passed());
}
