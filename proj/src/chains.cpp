#include "haantjes/chains.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "haantjes/error.hpp"
#include "haantjes/polynomial.hpp"

namespace haantjes {

namespace {

void require_chart(const OperatorField& k, const Expression& h) {
  if (!(*k.chart() == *h.chart())) throw ShapeError("operator and function live on different charts");
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

double chain_closedness(const OperatorField& k, const Expression& h, std::span<const double> x) {
  require_chart(k, h);
  const int d = k.dim();
  const OperatorJet kj = operator_jet(k, x);
  const Jet2 hj = jet2(h, x);
  const Eigen::VectorXd dh = to_vector(hj.gradient);
  const Eigen::MatrixXd hess = Eigen::Map<const Eigen::MatrixXd>(hj.hessian_matrix().data(), d, d);
  // dtheta(l, i) = d_l theta_i = sum_j d_l K^j_i d_j H + K^j_i d_l d_j H
  Eigen::MatrixXd dtheta(d, d);
  for (int l = 0; l < d; ++l) dtheta.row(l) = (kj.d[l].transpose() * dh + kj.value.transpose() * hess.col(l)).transpose();
  return (dtheta - dtheta.transpose()).cwiseAbs().maxCoeff();
}

VerificationReport chain_verify(const OperatorField& k, const Expression& h,
                                const Expression& target, const SampleSet& samples, double tol,
                                const std::string& label) {
  require_chart(k, h);
  VerificationReport report("chain " + label);
  CheckBuilder b("chain " + label + "^T dH = dH_target", "dH_alpha = K_alpha^T dH", tol,
                 samples.seed);
  const int d = k.dim();
  for (const auto& x : samples.points) {
    b.count_sample();
    try {
      const Eigen::MatrixXd kv = k.value(x);
      const Eigen::VectorXd dh = to_vector(jet1(h, x).gradient);
      const Eigen::VectorXd dt = to_vector(jet1(target, x).gradient);
      double worst = 0.0;
      for (int i = 0; i < d; ++i) {
        double sum = 0.0, mag = std::abs(dt(i));
        for (int j = 0; j < d; ++j) {
          const double t = kv(j, i) * dh(j);
          sum += t;
          mag = std::max(mag, std::abs(t));
        }
        worst = std::max(worst, std::abs(sum - dt(i)) / (1.0 + mag));
      }
      b.observe(worst, x);
    } catch (const EvalError& err) {
      b.fail(err.what(), x);
    }
  }
  report.add(b.finish());
  return report;
}

OperatorField build_ksov(const Expression& h, const Expression& h_alpha,
                         const SampleSet& samples, double tol) {
  if (!(*h.chart() == *h_alpha.chart())) throw ShapeError("functions live on different charts");
  const ChartPtr& chart = h.chart();
  const int n = chart->n();
  std::vector<Expression> diag(2 * n, constant(chart, 0));
  for (int i = 0; i < n; ++i) {
    const Expression num = differentiate(h_alpha, chart->p_index(i));
    if (identically_zero(num)) continue;
    const Expression den = differentiate(h, chart->p_index(i));
    const std::string slot = "slot " + std::to_string(i + 1) + " (" + chart->name(chart->p_index(i)) + ")";
    if (identically_zero(den))
      throw ConstructionError("chain operator " + slot + ": dH/d" + chart->name(chart->p_index(i)) +
                              " vanishes identically while dH_alpha/d" +
                              chart->name(chart->p_index(i)) + " does not");
    for (const auto& x : samples.points) {
      double v;
      try {
        v = eval(den, x);
      } catch (const EvalError& err) {
        throw ConstructionError("chain operator " + slot + ": " + err.what());
      }
      if (v == 0.0) throw ConstructionError("chain operator " + slot + ": dH/dp vanishes at a sample");
    }
    const Expression ratio = canonical_quotient(num, den);
    diag[chart->q_index(i)] = ratio;
    diag[chart->p_index(i)] = ratio;
  }
  OperatorField k = OperatorField::diagonal(chart, std::move(diag));
  const auto chain = chain_verify(k, h, h_alpha, samples, tol);
  if (!chain.passed())
    throw ConstructionError("constructed diagonal operator does not satisfy the chain equation:\n" +
                            chain.summary());
  const auto torsion = torsion_check(k, TorsionKind::Haantjes, samples, tol);
  if (!torsion.passed())
    throw ConstructionError("constructed diagonal operator is not Haantjes:\n" + torsion.summary());
  return k;
}

VerificationReport codistribution_check(const HaantjesAlgebra& alg, const Expression& h,
                                        std::span<const Expression> hamiltonians,
                                        const SampleSet& samples, double rank_tol) {
  VerificationReport report("codistribution D_H");
  CheckBuilder b("span{K_a^T dH} = span{dH_i}", "D_H = D (equal ranks, mutual containment)", 0.0,
                 samples.seed);
  const int d = alg.chart->dim();
  const int m = alg.rank();
  const int k = static_cast<int>(hamiltonians.size());
  for (const auto& x : samples.points) {
    b.count_sample();
    try {
      const Eigen::VectorXd dh = to_vector(jet1(h, x).gradient);
      Eigen::MatrixXcd dhk(d, m), dhs(d, k);
      for (int a = 0; a < m; ++a) dhk.col(a) = (alg.basis[a].value(x).transpose() * dh).cast<std::complex<double>>();
      for (int i = 0; i < k; ++i)
        dhs.col(i) = to_vector(jet1(hamiltonians[i], x).gradient).cast<std::complex<double>>();
      Eigen::MatrixXcd both(d, m + k);
      both << dhk, dhs;
      const int r1 = numerical_rank(dhk, rank_tol), r2 = numerical_rank(dhs, rank_tol),
                r = numerical_rank(both, rank_tol);
      if (r1 != r2 || r != r1)
        b.fail("ranks: span{K^T dH} " + std::to_string(r1) + ", span{dH_i} " + std::to_string(r2) +
                   ", joint " + std::to_string(r),
               x);
      b.observe(0.0, x);
    } catch (const EvalError& err) {
      b.fail(err.what(), x);
    }
  }
  report.add(b.finish());
  return report;
}

double chain_potential(const OperatorField& k, const Expression& h, std::span<const double> base,
                       std::span<const double> x, int segments) {
  require_chart(k, h);
  static constexpr std::array<double, 4> nodes{0.3399810435848563, 0.8611363115940526,
                                               -0.3399810435848563, -0.8611363115940526};
  static constexpr std::array<double, 4> weights{0.6521451548625461, 0.3478548451374538,
                                                 0.6521451548625461, 0.3478548451374538};
  const int d = k.dim();
  std::vector<double> p(base.begin(), base.end());
  double total = 0.0;
  for (int c = 0; c < d; ++c) {
    const double a = base[c], len = x[c] - a;
    if (len == 0.0) {
      p[c] = x[c];
      continue;
    }
    const double hseg = len / segments;
    for (int s = 0; s < segments; ++s) {
      const double mid = a + (s + 0.5) * hseg;
      for (std::size_t g = 0; g < nodes.size(); ++g) {
        p[c] = mid + 0.5 * hseg * nodes[g];
        const Eigen::VectorXd dh = to_vector(jet1(h, p).gradient);
        const double theta_c = k.value(p).col(c).dot(dh);
        total += 0.5 * hseg * weights[g] * theta_c;
      }
    }
    p[c] = x[c];
  }
  return total;
}

}  // namespace haantjes
