#include "haantjes/phasespace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "haantjes/error.hpp"

namespace haantjes {

SymplecticMatrix::SymplecticMatrix(int n) : n_(n), omega_(Eigen::MatrixXd::Zero(2 * n, 2 * n)) {
  if (n <= 0) throw ShapeError("symplectic matrix needs n > 0");
  omega_.topRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  omega_.bottomLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
}

namespace {

void require_same_chart(const Expression& f, const Expression& g) {
  if (!(*f.chart() == *g.chart())) throw ShapeError("expressions live on different charts");
}

struct Term {
  double value;
  double magnitude;  // largest of the two products
};

Term term_parts(std::span<const double> df, std::span<const double> dg, int n, int k) {
  const double a = df[k] * dg[n + k];
  const double b = df[n + k] * dg[k];
  return {a - b, std::max(std::abs(a), std::abs(b))};
}

std::vector<std::vector<double>> gradients(std::span<const Expression> hs,
                                           std::span<const double> x,
                                           std::span<const double> params) {
  std::vector<std::vector<double>> out;
  out.reserve(hs.size());
  for (const auto& h : hs) out.push_back(jet1(h, x, params).gradient);
  return out;
}

std::string pair_label(std::size_t i, std::size_t j) {
  return "{H" + std::to_string(i + 1) + ",H" + std::to_string(j + 1) + "}";
}

enum class Grouping { Term, Block, Full };

VerificationReport involution_check(std::span<const Expression> hs, const SampleSet& samples,
                                    double tol, std::span<const double> params, Grouping grouping) {
  const char* kind = grouping == Grouping::Term    ? "T-involution"
                     : grouping == Grouping::Block ? "P-involution"
                                                   : "involution";
  const char* anchor = grouping == Grouping::Term ? "every conjugate-pair term of {Hi,Hj} vanishes"
                       : grouping == Grouping::Block
                           ? "bracket restricted to each block vanishes"
                           : "full Poisson bracket vanishes";
  VerificationReport report(kind);
  if (hs.empty()) throw Error("involution check needs at least one Hamiltonian");
  for (std::size_t i = 1; i < hs.size(); ++i) require_same_chart(hs[0], hs[i]);
  const Chart& chart = *hs[0].chart();
  const int n = chart.n();

  std::vector<CheckBuilder> builders;
  for (std::size_t i = 0; i < hs.size(); ++i)
    for (std::size_t j = i + 1; j < hs.size(); ++j)
      builders.emplace_back(std::string(kind) + " " + pair_label(i, j), anchor, tol, samples.seed);

  for (const auto& x : samples.points) {
    std::vector<std::vector<double>> grads;
    try {
      grads = gradients(hs, x, params);
    } catch (const EvalError& err) {
      for (auto& b : builders) b.fail(err.what(), x);
      continue;
    }
    std::size_t slot = 0;
    for (std::size_t i = 0; i < hs.size(); ++i)
      for (std::size_t j = i + 1; j < hs.size(); ++j, ++slot) {
        auto& b = builders[slot];
        b.count_sample();
        double worst = 0.0;
        auto absorb = [&](double sum, double mag) {
          worst = std::max(worst, std::abs(sum) / (1.0 + mag));
        };
        if (grouping == Grouping::Term) {
          for (int k = 0; k < n; ++k) {
            const Term t = term_parts(grads[i], grads[j], n, k);
            absorb(t.value, t.magnitude);
          }
        } else {
          const int groups = grouping == Grouping::Block ? chart.block_count() : 1;
          for (int a = 0; a < groups; ++a) {
            const auto [lo, hi] = grouping == Grouping::Block ? chart.block_range(a)
                                                              : std::pair<int, int>{0, n};
            double sum = 0.0, mag = 0.0;
            for (int k = lo; k < hi; ++k) {
              const Term t = term_parts(grads[i], grads[j], n, k);
              sum += t.value;
              mag = std::max(mag, t.magnitude);
            }
            absorb(sum, mag);
          }
        }
        b.observe(worst, x);
      }
  }
  for (const auto& b : builders) report.add(b.finish());
  return report;
}

}  // namespace

double bracket_term(std::span<const double> df, std::span<const double> dg, int n, int k) {
  return df[k] * dg[n + k] - df[n + k] * dg[k];
}

double poisson_bracket(const Expression& f, const Expression& g, std::span<const double> x,
                       std::span<const double> params) {
  require_same_chart(f, g);
  const int n = f.chart()->n();
  const auto df = jet1(f, x, params).gradient;
  const auto dg = jet1(g, x, params).gradient;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += bracket_term(df, dg, n, k);
  return sum;
}

double partial_bracket(const Expression& f, const Expression& g, int block,
                       std::span<const double> x, std::span<const double> params) {
  require_same_chart(f, g);
  const Chart& chart = *f.chart();
  const auto [lo, hi] = chart.block_range(block);
  const auto df = jet1(f, x, params).gradient;
  const auto dg = jet1(g, x, params).gradient;
  double sum = 0.0;
  for (int k = lo; k < hi; ++k) sum += bracket_term(df, dg, chart.n(), k);
  return sum;
}

VerificationReport t_involution_check(std::span<const Expression> hs, const SampleSet& samples,
                                      double tol, std::span<const double> params) {
  return involution_check(hs, samples, tol, params, Grouping::Term);
}

VerificationReport p_involution_check(std::span<const Expression> hs, const SampleSet& samples,
                                      double tol, std::span<const double> params) {
  return involution_check(hs, samples, tol, params, Grouping::Block);
}

VerificationReport full_involution_check(std::span<const Expression> hs,
                                         const SampleSet& samples, double tol,
                                         std::span<const double> params) {
  return involution_check(hs, samples, tol, params, Grouping::Full);
}

double vertical_independence(std::span<const Expression> hs, std::span<const double> x,
                             std::span<const double> params) {
  if (hs.empty()) throw ShapeError("vertical independence needs n Hamiltonians");
  const int n = hs[0].chart()->n();
  if (static_cast<int>(hs.size()) != n)
    throw ShapeError("vertical independence needs exactly n = " + std::to_string(n) +
                     " Hamiltonians, got " + std::to_string(hs.size()));
  Eigen::MatrixXd jac(n, n);
  for (int i = 0; i < n; ++i) {
    require_same_chart(hs[0], hs[i]);
    const auto g = jet1(hs[i], x, params).gradient;
    for (int k = 0; k < n; ++k) jac(i, k) = g[n + k];
  }
  return jac.determinant();
}

Eigen::VectorXd gradient(const Expression& e, std::span<const double> x,
                         std::span<const double> params) {
  const auto g = jet1(e, x, params).gradient;
  return Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
}

}  // namespace haantjes
