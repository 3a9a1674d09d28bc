#include "haantjes/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "haantjes/error.hpp"
#include "haantjes/phasespace.hpp"

namespace haantjes {

OperatorField::OperatorField(ChartPtr chart, std::vector<Expression> entries)
    : chart_(std::move(chart)), dim_(chart_->dim()), entries_(std::move(entries)) {
  const std::size_t expected = static_cast<std::size_t>(dim_) * dim_;
  if (entries_.size() != expected)
    throw ShapeError("operator needs " + std::to_string(expected) + " entries (2n x 2n, n = " +
                     std::to_string(chart_->n()) + "), got " + std::to_string(entries_.size()));
  for (const auto& e : entries_)
    if (!(*e.chart() == *chart_)) throw ShapeError("operator entry lives on a different chart");
}

OperatorField OperatorField::zero(ChartPtr chart) {
  const int d = chart->dim();
  std::vector<Expression> entries(static_cast<std::size_t>(d) * d, constant(chart, 0));
  return OperatorField(chart, std::move(entries));
}

OperatorField OperatorField::identity(ChartPtr chart) {
  std::vector<Expression> diag(chart->dim(), constant(chart, 1));
  return diagonal(chart, std::move(diag));
}

OperatorField OperatorField::diagonal(ChartPtr chart, std::vector<Expression> diag) {
  const int d = chart->dim();
  if (static_cast<int>(diag.size()) != d) throw ShapeError("diagonal needs 2n entries");
  std::vector<Expression> entries(static_cast<std::size_t>(d) * d, constant(chart, 0));
  for (int i = 0; i < d; ++i) entries[i * d + i] = diag[i];
  return OperatorField(chart, std::move(entries));
}

Eigen::MatrixXd OperatorField::value(std::span<const double> x) const {
  Eigen::MatrixXd m(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) m(i, j) = eval((*this)(i, j), x);
  return m;
}

OperatorJet operator_jet(const OperatorField& a, std::span<const double> x) {
  const int d = a.dim();
  OperatorJet out{Eigen::MatrixXd::Zero(d, d),
                  std::vector<Eigen::MatrixXd>(d, Eigen::MatrixXd::Zero(d, d))};
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const Expression& e = a(i, j);
      if (auto c = as_constant(e)) {
        out.value(i, j) = c->convert_to<double>();
        continue;
      }
      const Jet1 jet = jet1(e, x);
      out.value(i, j) = jet.value;
      for (int l = 0; l < d; ++l) out.d[l](i, j) = jet.gradient[l];
    }
  return out;
}

OperatorJet constant_jet(const Eigen::MatrixXd& value) {
  const auto d = value.rows();
  return {value, std::vector<Eigen::MatrixXd>(d, Eigen::MatrixXd::Zero(d, d))};
}

OperatorJet combine(const Jet1& f, const OperatorJet& a, const Jet1& g, const OperatorJet& b) {
  OperatorJet out;
  out.value = f.value * a.value + g.value * b.value;
  out.d.resize(a.d.size());
  for (std::size_t l = 0; l < a.d.size(); ++l)
    out.d[l] = f.gradient[l] * a.value + f.value * a.d[l] + g.gradient[l] * b.value +
               g.value * b.d[l];
  return out;
}

OperatorJet compose(const OperatorJet& a, const OperatorJet& b) {
  OperatorJet out;
  out.value = a.value * b.value;
  out.d.resize(a.d.size());
  for (std::size_t l = 0; l < a.d.size(); ++l) out.d[l] = a.d[l] * b.value + a.value * b.d[l];
  return out;
}

double Torsion3::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double ScaledTorsion::scaled_max() const {
  double m = 0.0;
  const auto& v = value.data();
  const auto& s = magnitude.data();
  for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]) / (1.0 + s[i]));
  return m;
}

ScaledTorsion nijenhuis_torsion_scaled(const OperatorJet& a) {
  const int d = a.dim();
  ScaledTorsion out{Torsion3(d), Torsion3(d)};
  const auto& A = a.value;
  const auto& D = a.d;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = j + 1; k < d; ++k) {
        double t = 0.0, mag = 0.0;
        for (int l = 0; l < d; ++l) {
          const double u = A(l, j) * D[l](i, k);
          const double v = A(l, k) * D[l](i, j);
          const double w = A(i, l) * (D[j](l, k) - D[k](l, j));
          t += u - v - w;
          mag += std::abs(u) + std::abs(v) + std::abs(A(i, l)) * (std::abs(D[j](l, k)) + std::abs(D[k](l, j)));
        }
        out.value.set(i, j, k, t);
        out.magnitude.set_symmetric(i, j, k, mag);
      }
  return out;
}

namespace {

// Haantjes combination of a torsion tensor with A; also used with |A|, |tau|.
Torsion3 haantjes_combine(const Torsion3& tau, const Eigen::MatrixXd& A) {
  const int d = static_cast<int>(A.rows());
  const Eigen::MatrixXd A2 = A * A;
  Torsion3 out(d);
  // U^l_{jk} = tau^l_{mk} A^m_j + tau^l_{jm} A^m_k
  std::vector<double> U(static_cast<std::size_t>(d) * d * d, 0.0);
  auto u = [&](int l, int j, int k) -> double& { return U[(static_cast<std::size_t>(l) * d + j) * d + k]; };
  for (int l = 0; l < d; ++l)
    for (int j = 0; j < d; ++j)
      for (int k = j + 1; k < d; ++k) {
        double s = 0.0;
        for (int m = 0; m < d; ++m) s += tau(l, m, k) * A(m, j) + tau(l, j, m) * A(m, k);
        u(l, j, k) = s;
      }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = j + 1; k < d; ++k) {
        double h = 0.0;
        for (int m = 0; m < d; ++m) h += A2(i, m) * tau(m, j, k);
        for (int l = 0; l < d; ++l) {
          double inner = 0.0;
          for (int m = 0; m < d; ++m) inner += tau(i, l, m) * A(m, k);
          h += inner * A(l, j);
          h -= A(i, l) * u(l, j, k);
        }
        out.set(i, j, k, h);
      }
  return out;
}

// Same contraction pattern with every factor replaced by its absolute value
// and every subtraction by an addition.
Torsion3 haantjes_magnitude(const Torsion3& tau_mag, const Eigen::MatrixXd& A) {
  const int d = static_cast<int>(A.rows());
  const Eigen::MatrixXd B = A.cwiseAbs();
  const Eigen::MatrixXd B2 = B * B;
  auto t = [&](int i, int j, int k) { return tau_mag(i, j, k); };
  Torsion3 out(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = j + 1; k < d; ++k) {
        double h = 0.0;
        for (int m = 0; m < d; ++m) h += B2(i, m) * t(m, j, k);
        for (int l = 0; l < d; ++l) {
          double inner = 0.0, back = 0.0;
          for (int m = 0; m < d; ++m) {
            inner += t(i, l, m) * B(m, k);
            back += t(l, m, k) * B(m, j) + t(l, j, m) * B(m, k);
          }
          h += inner * B(l, j) + B(i, l) * back;
        }
        out.set_symmetric(i, j, k, h);
      }
  return out;
}

}  // namespace

ScaledTorsion haantjes_torsion_scaled(const OperatorJet& a) {
  const ScaledTorsion tau = nijenhuis_torsion_scaled(a);
  return {haantjes_combine(tau.value, a.value), haantjes_magnitude(tau.magnitude, a.value)};
}

Torsion3 nijenhuis_torsion(const OperatorJet& a) { return nijenhuis_torsion_scaled(a).value; }

Torsion3 haantjes_torsion(const OperatorJet& a) {
  return haantjes_combine(nijenhuis_torsion(a), a.value);
}

Torsion3 nijenhuis_torsion(const OperatorField& a, std::span<const double> x) {
  return nijenhuis_torsion(operator_jet(a, x));
}

Torsion3 haantjes_torsion(const OperatorField& a, std::span<const double> x) {
  return haantjes_torsion(operator_jet(a, x));
}

double symplectic_compat(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() % 2 != 0) throw ShapeError("operator must be 2n x 2n");
  const SymplecticMatrix omega(static_cast<int>(a.rows() / 2));
  const Eigen::MatrixXd& w = omega.matrix();
  return (w * a - a.transpose() * w).cwiseAbs().maxCoeff();
}

double symplectic_compat(const OperatorField& a, std::span<const double> x) {
  return symplectic_compat(a.value(x));
}

namespace {

void require_same_chart(const OperatorField& a, const OperatorField& b) {
  if (!(*a.chart() == *b.chart())) throw ShapeError("operators live on different charts");
}

}  // namespace

OperatorField op_combine(const Expression& f, const OperatorField& a, const Expression& g,
                         const OperatorField& b) {
  require_same_chart(a, b);
  std::vector<Expression> entries;
  entries.reserve(a.entries().size());
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    entries.push_back(f * a.entries()[i] + g * b.entries()[i]);
  return OperatorField(a.chart(), std::move(entries));
}

OperatorField op_compose(const OperatorField& a, const OperatorField& b) {
  require_same_chart(a, b);
  const int d = a.dim();
  std::vector<Expression> entries;
  entries.reserve(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Expression sum = constant(a.chart(), 0);
      for (int k = 0; k < d; ++k) sum = sum + a(i, k) * b(k, j);
      entries.push_back(sum);
    }
  return OperatorField(a.chart(), std::move(entries));
}

OperatorField op_commutator(const OperatorField& a, const OperatorField& b) {
  const auto ab = op_compose(a, b);
  const auto ba = op_compose(b, a);
  std::vector<Expression> entries;
  entries.reserve(ab.entries().size());
  for (std::size_t i = 0; i < ab.entries().size(); ++i)
    entries.push_back(ab.entries()[i] - ba.entries()[i]);
  return OperatorField(a.chart(), std::move(entries));
}

OperatorField op_scale(const Expression& f, const OperatorField& a) {
  std::vector<Expression> entries;
  entries.reserve(a.entries().size());
  for (const auto& e : a.entries()) entries.push_back(f * e);
  return OperatorField(a.chart(), std::move(entries));
}

namespace {

CheckResult torsion_over_samples(const std::string& name, const std::string& anchor,
                                 TorsionKind kind, const SampleSet& samples, double tol,
                                 const std::function<OperatorJet(std::span<const double>)>& jet_at) {
  CheckBuilder b(name, anchor, tol, samples.seed);
  for (const auto& x : samples.points) {
    b.count_sample();
    try {
      const OperatorJet j = jet_at(x);
      const ScaledTorsion t =
          kind == TorsionKind::Nijenhuis ? nijenhuis_torsion_scaled(j) : haantjes_torsion_scaled(j);
      b.observe(t.scaled_max(), x);
    } catch (const EvalError& err) {
      b.fail(err.what(), x);
    }
  }
  return b.finish();
}

}  // namespace

VerificationReport torsion_check(const OperatorField& a, TorsionKind kind,
                                 const SampleSet& samples, double tol, const std::string& label) {
  const bool nij = kind == TorsionKind::Nijenhuis;
  VerificationReport report(std::string(nij ? "Nijenhuis" : "Haantjes") + " torsion of " + label);
  report.add(torsion_over_samples(
      std::string(nij ? "nijenhuis" : "haantjes") + " torsion " + label,
      nij ? "Nijenhuis torsion vanishes" : "Haantjes torsion vanishes", kind, samples, tol,
      [&](std::span<const double> x) { return operator_jet(a, x); }));
  return report;
}

VerificationReport poly_closure_check(const OperatorField& a, std::span<const Expression> coeffs,
                                      const SampleSet& samples, double tol) {
  VerificationReport report("polynomial closure");
  CheckResult pre = torsion_over_samples("precondition: haantjes torsion A",
                                         "A is a Haantjes operator", TorsionKind::Haantjes,
                                         samples, tol,
                                         [&](std::span<const double> x) { return operator_jet(a, x); });
  if (!pre.passed) pre.notes.push_back("precondition violated: A is not a Haantjes operator");
  report.add(pre);
  if (coeffs.empty()) throw Error("polynomial needs at least one coefficient");
  const int d = a.dim();
  report.add(torsion_over_samples(
      "haantjes torsion of polynomial in A", "polynomials in a Haantjes operator are Haantjes",
      TorsionKind::Haantjes, samples, tol, [&](std::span<const double> x) {
        const OperatorJet aj = operator_jet(a, x);
        OperatorJet power = constant_jet(Eigen::MatrixXd::Identity(d, d));
        OperatorJet sum = constant_jet(Eigen::MatrixXd::Zero(d, d));
        const Jet1 one{1.0, std::vector<double>(d, 0.0)};
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
          if (k > 0) power = compose(power, aj);
          sum = combine(one, sum, jet1(coeffs[k], x), power);
        }
        return sum;
      }));
  return report;
}

}  // namespace haantjes
