#include "haantjes/stackel.hpp"

#include <algorithm>
#include <cmath>

#include "haantjes/chains.hpp"
#include "haantjes/error.hpp"
#include "haantjes/phasespace.hpp"
#include "haantjes/polynomial.hpp"

namespace haantjes {

namespace {

using Matrix = std::vector<std::vector<Expression>>;

std::string entry_name(const std::string& base, int a, int b) {
  return base + std::to_string(a + 1) + std::to_string(b + 1);
}

void check_shapes(const StackelSpec& spec) {
  if (!spec.chart) throw ShapeError("Staeckel data has no chart");
  const int m = spec.m();
  if (m != spec.chart->block_count())
    throw ShapeError("Staeckel vector has " + std::to_string(m) + " entries but the chart has " +
                     std::to_string(spec.chart->block_count()) + " blocks");
  if (static_cast<int>(spec.matrix.size()) != m)
    throw ShapeError("Staeckel matrix must have " + std::to_string(m) + " rows");
  for (const auto& row : spec.matrix)
    if (static_cast<int>(row.size()) != m)
      throw ShapeError("Staeckel matrix must be " + std::to_string(m) + " x " + std::to_string(m));
}

void check_entry(const Expression& e, const std::string& label, int block, bool momenta_ok,
                 const Chart& chart) {
  for (int v : variables(e)) {
    const bool wrong_block = chart.block_of(v) != block;
    const bool momentum = chart.is_momentum(v) && !momenta_ok;
    if (wrong_block || momentum)
      throw ConstructionError(label + " = " + print(e) + " depends on " + chart.name(v) +
                              (wrong_block ? ", which is not in block " + std::to_string(block + 1)
                                           : ", a momentum"));
  }
}

Matrix minor_of(const Matrix& s, int row, int col) {
  Matrix out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (static_cast<int>(i) == row) continue;
    std::vector<Expression> r;
    for (std::size_t j = 0; j < s.size(); ++j)
      if (static_cast<int>(j) != col) r.push_back(s[i][j]);
    out.push_back(std::move(r));
  }
  return out;
}

Expression raw_det(const Matrix& s) {
  if (s.size() == 1) return s[0][0];
  Expression sum = constant(s[0][0].chart(), 0);
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (is_zero(s[0][j])) continue;
    const Expression term = s[0][j] * raw_det(minor_of(s, 0, static_cast<int>(j)));
    sum = j % 2 ? sum - term : sum + term;
  }
  return sum;
}

}  // namespace

std::vector<Expression> StackelSystem::guards() const {
  std::vector<Expression> out{det};
  if (generator > 0)
    for (const auto& e : adjugate[generator - 1])
      if (!as_constant(e)) out.push_back(e);
  return out;
}

void check_locality(const StackelSpec& spec) {
  check_shapes(spec);
  const Chart& chart = *spec.chart;
  for (int a = 0; a < spec.m(); ++a) {
    for (int b = 0; b < spec.m(); ++b)
      check_entry(spec.matrix[a][b], entry_name("S", a, b), a, spec.momentum_rows, chart);
    check_entry(spec.vector[a], "f" + std::to_string(a + 1), a, true, chart);
  }
}

Expression determinant(const Matrix& s) {
  if (s.empty()) throw ShapeError("empty matrix");
  return canonicalize(raw_det(s));
}

Matrix adjugate(const Matrix& s) {
  const int m = static_cast<int>(s.size());
  if (m == 0) throw ShapeError("empty matrix");
  const ChartPtr& chart = s[0][0].chart();
  Matrix adj(m, std::vector<Expression>(m, constant(chart, 1)));
  if (m == 1) return adj;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      // adj(i, j) = (-1)^(i+j) det of S without row j and column i
      Expression c = canonicalize(raw_det(minor_of(s, j, i)));
      adj[i][j] = (i + j) % 2 ? canonicalize(-c) : c;
    }
  return adj;
}

VerificationReport validate_spec(const StackelSpec& spec, const SampleSet& samples,
                                 double det_min) {
  check_locality(spec);
  VerificationReport report("Staeckel data");
  CheckBuilder loc("row locality", "S_ab and f_a depend on block a only", 0.0, samples.seed);
  loc.observe(0.0, {});
  report.add(loc.finish());

  const Expression det = determinant(spec.matrix);
  CheckBuilder b("det S bounded away from zero", "|det S| >= det_min", det_min, samples.seed);
  for (const auto& x : samples.points) {
    b.count_sample();
    try {
      const double v = std::abs(eval(det, x));
      if (v < det_min) b.fail("|det S| = " + format_double(v), x);
    } catch (const EvalError& err) {
      b.fail(err.what(), x);
    }
  }
  b.note("det S = " + print(det));
  report.add(b.finish());
  return report;
}

StackelSystem build_system(const StackelSpec& spec, int generator) {
  check_locality(spec);
  const int m = spec.m();
  if (generator < 0 || generator > m)
    throw ShapeError("generator index " + std::to_string(generator) + " outside 1.." +
                     std::to_string(m));
  const ChartPtr& chart = spec.chart;
  StackelSystem sys{{}, {}, 0, determinant(spec.matrix), {}};
  if (identically_zero(sys.det)) throw ConstructionError("det S vanishes identically");
  sys.adjugate = adjugate(spec.matrix);

  for (int a = 0; a < m; ++a) {
    Expression num = constant(chart, 0);
    for (int i = 0; i < m; ++i)
      if (!is_zero(sys.adjugate[a][i])) num = num + sys.adjugate[a][i] * spec.vector[i];
    sys.hamiltonians.push_back(canonical_quotient(num, sys.det));
  }
  if (generator == 0) return sys;

  const int g = generator - 1;
  for (int i = 0; i < m; ++i)
    if (identically_zero(sys.adjugate[g][i]))
      throw ConstructionError("generator H" + std::to_string(generator) +
                              ": entry (" + std::to_string(generator) + "," +
                              std::to_string(i + 1) +
                              ") of the adjugate of S vanishes identically, so block " +
                              std::to_string(i + 1) +
                              " has no slot coefficient; choose a different generator");
  sys.generator = generator;
  for (int a = 0; a < m; ++a) {
    if (a == g) {
      sys.operators.push_back(OperatorField::identity(chart));
      continue;
    }
    std::vector<Expression> diag(chart->dim(), constant(chart, 0));
    for (int i = 0; i < m; ++i) {
      const Expression c = canonical_quotient(sys.adjugate[a][i], sys.adjugate[g][i]);
      const auto [lo, hi] = chart->block_range(i);
      for (int k = lo; k < hi; ++k) {
        diag[chart->q_index(k)] = c;
        diag[chart->p_index(k)] = c;
      }
    }
    sys.operators.push_back(OperatorField::diagonal(chart, std::move(diag)));
  }
  return sys;
}

StackelSystem build_akn(const ChartPtr& chart, const Matrix& s, const std::vector<Expression>& f) {
  for (int b : chart->blocks())
    if (b != 1) throw ShapeError("classic Staeckel systems need blocks of size 1");
  StackelSpec spec{chart, s, f, false};
  check_locality(spec);
  const auto adj = adjugate(s);
  for (int g = 0; g < spec.m(); ++g) {
    const bool ok = std::none_of(adj[g].begin(), adj[g].end(),
                                 [](const Expression& e) { return identically_zero(e); });
    if (ok) return build_system(spec, g + 1);
  }
  return build_system(spec, 0);
}

std::vector<double> separation_residuals(const StackelSpec& spec, std::span<const double> h,
                                         std::span<const double> x) {
  check_shapes(spec);
  const int m = spec.m();
  if (static_cast<int>(h.size()) != m)
    throw ShapeError("need " + std::to_string(m) + " level values, got " +
                     std::to_string(h.size()));
  std::vector<double> r(m);
  for (int a = 0; a < m; ++a) {
    double v = eval(spec.vector[a], x);
    for (int b = 0; b < m; ++b) v -= eval(spec.matrix[a][b], x) * h[b];
    r[a] = v;
  }
  return r;
}

VerificationReport verify_system(const StackelSpec& spec, const StackelSystem& sys,
                                 const SampleSet& samples, double tol, double identity_tol) {
  const int m = spec.m();
  VerificationReport report("Staeckel system");
  CheckBuilder b("S H - F = 0", "sum_b S_ab H_b = f_a", identity_tol, samples.seed);
  for (const auto& x : samples.points) {
    b.count_sample();
    try {
      double worst = 0.0;
      for (int a = 0; a < m; ++a) {
        const double fa = eval(spec.vector[a], x);
        double sum = 0.0, mag = std::abs(fa);
        for (int c = 0; c < m; ++c) {
          const double t = eval(spec.matrix[a][c], x) * eval(sys.hamiltonians[c], x);
          sum += t;
          mag = std::max(mag, std::abs(t));
        }
        worst = std::max(worst, std::abs(sum - fa) / (1.0 + mag));
      }
      b.observe(worst, x);
    } catch (const EvalError& err) {
      b.fail(err.what(), x);
    }
  }
  report.add(b.finish());
  report.merge(t_involution_check(sys.hamiltonians, samples, tol));
  if (sys.generator > 0) {
    const Expression& hg = sys.hamiltonians[sys.generator - 1];
    for (int a = 0; a < m; ++a)
      report.merge(chain_verify(sys.operators[a], hg, sys.hamiltonians[a], samples, tol,
                                "K" + std::to_string(a + 1)));
    report.merge(verify_algebra(HaantjesAlgebra(spec.chart, sys.operators), samples, 8, tol));
  }
  return report;
}

double symmetry_condition(std::span<const Expression> phi, std::span<const double> x,
                          std::span<const double> h) {
  const int n = static_cast<int>(phi.size());
  if (n == 0 || phi[0].chart()->n() != n)
    throw ShapeError("symmetry test needs n separation relations");
  Eigen::MatrixXd dq(n, n), dp(n, n);
  for (int i = 0; i < n; ++i) {
    const auto g = jet1(phi[i], x, h).gradient;
    for (int k = 0; k < n; ++k) {
      dq(i, k) = g[k];
      dp(i, k) = g[n + k];
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(dp);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw EvalError("momentum Jacobian of the separation relations is singular");
  const Eigen::MatrixXd mat = lu.solve(dq);
  return (mat - mat.transpose()).cwiseAbs().maxCoeff();
}

VerificationReport symmetry_check(std::span<const Expression> phi,
                                  std::span<const Expression> level,
                                  std::span<const double> fixed_h, const SampleSet& samples,
                                  double tol) {
  VerificationReport report("separation symmetry");
  CheckBuilder b("[dphi/dp]^{-1} [dphi/dq] symmetric", "M - M^T = 0", tol, samples.seed);
  for (const auto& x : samples.points) {
    b.count_sample();
    try {
      std::vector<double> h(fixed_h.begin(), fixed_h.end());
      if (!level.empty()) {
        h.clear();
        for (const auto& e : level) h.push_back(eval(e, x));
      }
      b.observe(symmetry_condition(phi, x, h), x);
    } catch (const EvalError& err) {
      b.fail(err.what(), x);
    }
  }
  report.add(b.finish());
  return report;
}

}  // namespace haantjes
