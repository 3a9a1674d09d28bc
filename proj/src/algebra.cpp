#include "haantjes/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "haantjes/error.hpp"
#include "haantjes/phasespace.hpp"

namespace haantjes {

using cd = std::complex<double>;

HaantjesAlgebra::HaantjesAlgebra(ChartPtr c, std::vector<OperatorField> b,
                                 std::vector<std::string> n)
    : chart(std::move(c)), basis(std::move(b)), names(std::move(n)) {
  if (basis.empty()) throw ShapeError("algebra needs at least one basis operator");
  for (const auto& k : basis)
    if (!(*k.chart() == *chart)) throw ShapeError("algebra basis operators must share the chart");
  if (names.empty())
    for (int i = 0; i < rank(); ++i) names.push_back("K" + std::to_string(i + 1));
  if (static_cast<int>(names.size()) != rank()) throw ShapeError("one name per basis operator");
}

bool Spectrum::semisimple() const {
  return std::all_of(clusters.begin(), clusters.end(),
                     [](const EigenCluster& c) { return c.riesz_index == 1; });
}

double default_cluster_tol(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  return 1e-7 * (1.0 + es.eigenvalues().cwiseAbs().maxCoeff());
}

int numerical_rank(const Eigen::MatrixXcd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

namespace {

Eigen::MatrixXcd orth(const Eigen::MatrixXcd& m, double rel_tol = 1e-9) {
  if (m.cols() == 0) return m;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(0) > 0 && s(i) > rel_tol * s(0)) ++r;
  return svd.matrixU().leftCols(r);
}

// Null space of m from the trailing right singular vectors; real input keeps
// a real basis.
Eigen::MatrixXcd null_space(const Eigen::MatrixXcd& m, int rank, bool real) {
  const auto cols = m.cols();
  if (real) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.real(), Eigen::ComputeFullV);
    return svd.matrixV().rightCols(cols - rank).cast<cd>();
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(cols - rank);
}

bool value_less(const cd& a, const cd& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

std::string format_value(const cd& v) {
  std::ostringstream os;
  os << format_double(v.real());
  if (v.imag() != 0.0) os << (v.imag() < 0 ? " - " : " + ") << format_double(std::abs(v.imag())) << "i";
  return os.str();
}

}  // namespace

Eigen::MatrixXcd intersect_spans(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v,
                                 double tol) {
  const Eigen::MatrixXcd U = orth(u), V = orth(v);
  const auto dim = u.rows();
  if (U.cols() == 0 || V.cols() == 0) return Eigen::MatrixXcd(dim, 0);
  Eigen::MatrixXcd w(dim, U.cols() + V.cols());
  w << U, -V;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(w, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const Eigen::Index k = w.cols();
  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double sigma = i < s.size() ? s(i) : 0.0;
    if (sigma <= tol) null_cols.push_back(i);
  }
  Eigen::MatrixXcd out(dim, static_cast<Eigen::Index>(null_cols.size()));
  for (std::size_t c = 0; c < null_cols.size(); ++c)
    out.col(static_cast<Eigen::Index>(c)) = U * svd.matrixV().col(null_cols[c]).head(U.cols());
  return orth(out);
}

// Parlett-Reinsch balancing with powers of two: D^{-1} A D has the same
// eigenvalues, smaller norm, and so smaller splitting of defective ones.
static Eigen::MatrixXd balanced(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0, r = 0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != i) {
          c += std::abs(a(j, i));
          r += std::abs(a(i, j));
        }
      if (c == 0 || r == 0) continue;
      double f = 1;
      const double s = c + r;
      while (c < r / 2) {
        c *= 2;
        r /= 2;
        f *= 2;
      }
      while (c >= r * 2) {
        c /= 2;
        r *= 2;
        f /= 2;
      }
      if (c + r < 0.95 * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
  return a;
}

Spectrum spectrum_at(const Eigen::MatrixXd& a, double cluster_tol) {
  const int dim = static_cast<int>(a.rows());
  if (a.cols() != dim) throw ShapeError("spectrum of a non-square matrix");
  Eigen::EigenSolver<Eigen::MatrixXd> es(balanced(a), false);
  if (es.info() != Eigen::Success) throw Error("eigenvalue computation did not converge");
  const Eigen::VectorXcd ev = es.eigenvalues();
  if (cluster_tol <= 0.0) cluster_tol = 1e-7 * (1.0 + ev.cwiseAbs().maxCoeff());

  // single-linkage clustering
  std::vector<int> parent(dim);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j)
      if (std::abs(ev(i) - ev(j)) <= cluster_tol) parent[find(i)] = find(j);

  Spectrum out;
  std::vector<std::vector<int>> groups(dim);
  for (int i = 0; i < dim; ++i) groups[find(i)].push_back(i);
  for (const auto& g : groups) {
    if (g.empty()) continue;
    EigenCluster c;
    cd sum = 0;
    for (int i : g) sum += ev(i);
    c.value = sum / static_cast<double>(g.size());
    if (std::abs(c.value.imag()) <= cluster_tol) c.value = {c.value.real(), 0.0};
    c.algebraic_multiplicity = static_cast<int>(g.size());
    out.clusters.push_back(std::move(c));
  }
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const EigenCluster& x, const EigenCluster& y) { return value_less(x.value, y.value); });

  for (std::size_t i = 0; i < out.clusters.size(); ++i)
    for (std::size_t j = i + 1; j < out.clusters.size(); ++j)
      if (std::abs(out.clusters[i].value - out.clusters[j].value) <= 10 * cluster_tol)
        out.warnings.push_back("eigenvalue clusters " + format_value(out.clusters[i].value) +
                               " and " + format_value(out.clusters[j].value) +
                               " are within 10x the clustering tolerance");

  const Eigen::MatrixXcd ac = a.cast<cd>();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
  for (auto& c : out.clusters) {
    const Eigen::MatrixXcd m = ac - c.value * id;
    Eigen::MatrixXcd power = m;
    int rank = numerical_rank(power);
    c.geometric_multiplicity = dim - rank;
    int k = 1;
    for (; k <= dim; ++k) {
      const Eigen::MatrixXcd next = power * m;
      const int next_rank = numerical_rank(next);
      if (next_rank == rank) break;
      power = next;
      rank = next_rank;
    }
    c.riesz_index = k;
    c.basis = null_space(power, rank, c.is_real());
    if (c.basis.cols() != c.algebraic_multiplicity)
      out.warnings.push_back("generalized eigenspace of " + format_value(c.value) + " has rank " +
                             std::to_string(c.basis.cols()) + " but algebraic multiplicity " +
                             std::to_string(c.algebraic_multiplicity));
    if (c.basis.cols() % 2 != 0) out.even_ranks = false;
    out.minimal_polynomial_degree += c.riesz_index;
  }
  return out;
}

Spectrum spectrum_at(const OperatorField& a, std::span<const double> x, double cluster_tol) {
  return spectrum_at(a.value(x), cluster_tol);
}

bool semisimple_at(const OperatorField& a, std::span<const double> x, double cluster_tol) {
  return spectrum_at(a, x, cluster_tol).semisimple();
}

JointDecomposition joint_distributions(std::span<const Eigen::MatrixXd> values,
                                       double cluster_tol) {
  if (values.empty()) throw ShapeError("joint distributions need at least one operator");
  const auto dim = values[0].rows();
  JointDecomposition out;
  out.subspaces.push_back({{}, Eigen::MatrixXcd::Identity(dim, dim)});
  for (const auto& v : values) {
    const Spectrum s = spectrum_at(v, cluster_tol);
    out.warnings.insert(out.warnings.end(), s.warnings.begin(), s.warnings.end());
    std::vector<JointDistribution> next;
    for (const auto& sub : out.subspaces)
      for (const auto& c : s.clusters) {
        Eigen::MatrixXcd b = intersect_spans(sub.basis, c.basis);
        if (b.cols() == 0) continue;
        JointDistribution j{sub.eigenvalues, std::move(b)};
        j.eigenvalues.push_back(c.value);
        next.push_back(std::move(j));
      }
    out.subspaces = std::move(next);
  }
  std::sort(out.subspaces.begin(), out.subspaces.end(),
            [](const JointDistribution& a, const JointDistribution& b) {
              if (a.rank() != b.rank()) return a.rank() > b.rank();
              return std::lexicographical_compare(a.eigenvalues.begin(), a.eigenvalues.end(),
                                                  b.eigenvalues.begin(), b.eigenvalues.end(),
                                                  value_less);
            });
  Eigen::Index total = 0;
  for (const auto& s : out.subspaces) {
    total += s.rank();
    if (s.rank() % 2 != 0) out.even_ranks = false;
  }
  if (total != dim) {
    out.direct_sum = false;
  } else {
    Eigen::MatrixXcd all(dim, total);
    Eigen::Index col = 0;
    for (const auto& s : out.subspaces) {
      all.middleCols(col, s.rank()) = s.basis;
      col += s.rank();
    }
    out.direct_sum = numerical_rank(all) == dim;
  }
  if (!out.direct_sum) out.warnings.push_back("joint distributions do not form a direct sum");
  return out;
}

JointDecomposition joint_distributions(const HaantjesAlgebra& alg, std::span<const double> x,
                                       double cluster_tol) {
  std::vector<Eigen::MatrixXd> values;
  for (const auto& k : alg.basis) values.push_back(k.value(x));
  return joint_distributions(values, cluster_tol);
}

namespace {

double scaled_entry_max(const Eigen::MatrixXd& residual, double scale) {
  return residual.cwiseAbs().maxCoeff() / (1.0 + scale);
}

}  // namespace

VerificationReport verify_algebra(const HaantjesAlgebra& alg, const SampleSet& samples, int trials,
                                  double tol) {
  VerificationReport report("Haantjes algebra of rank " + std::to_string(alg.rank()));
  const int m = alg.rank();
  const int dim = alg.chart->dim();
  CheckBuilder basis("torsion of basis operators", "each basis operator is a Haantjes operator",
                     tol, samples.seed);
  CheckBuilder module("module closure f Ki + g Kj",
                      "Haantjes torsion of combinations with function coefficients vanishes", tol,
                      samples.seed);
  CheckBuilder ring("ring closure Ki Kj", "Haantjes torsion of products vanishes", tol,
                    samples.seed);
  CheckBuilder comm("commutators", "basis operators commute", tol, samples.seed);
  CheckBuilder compat("symplectic compatibility", "Omega K = K^T Omega", tol, samples.seed);

  // Random affine coefficient functions, fixed for the whole run.
  struct Trial {
    int i, j;
    std::vector<double> f, g;  // constant term then gradient
  };
  std::vector<Trial> plan;
  UniformStream rng(samples.seed ^ 0x9e3779b97f4a7c15ULL);
  for (int t = 0; t < trials; ++t) {
    Trial tr;
    tr.i = std::min(m - 1, static_cast<int>(rng.next(0, m)));
    tr.j = std::min(m - 1, static_cast<int>(rng.next(0, m)));
    for (int k = 0; k <= dim; ++k) {
      tr.f.push_back(rng.next(-1, 1));
      tr.g.push_back(rng.next(-1, 1));
    }
    plan.push_back(std::move(tr));
  }
  auto affine = [&](const std::vector<double>& c, std::span<const double> x) {
    Jet1 j{c[0], std::vector<double>(c.begin() + 1, c.end())};
    for (int k = 0; k < dim; ++k) j.value += c[k + 1] * x[k];
    return j;
  };

  for (const auto& x : samples.points) {
    std::vector<OperatorJet> jets;
    try {
      for (const auto& k : alg.basis) jets.push_back(operator_jet(k, x));
    } catch (const EvalError& err) {
      for (auto* b : {&basis, &module, &ring, &comm, &compat}) b->fail(err.what(), x);
      continue;
    }
    for (auto* b : {&basis, &module, &ring, &comm, &compat}) b->count_sample();
    double worst = 0.0;
    for (const auto& j : jets) worst = std::max(worst, haantjes_torsion_scaled(j).scaled_max());
    basis.observe(worst, x);

    worst = 0.0;
    for (const auto& tr : plan) {
      const OperatorJet c = combine(affine(tr.f, x), jets[tr.i], affine(tr.g, x), jets[tr.j]);
      worst = std::max(worst, haantjes_torsion_scaled(c).scaled_max());
    }
    module.observe(worst, x);

    double ring_worst = 0.0, comm_worst = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        ring_worst = std::max(ring_worst, haantjes_torsion_scaled(compose(jets[i], jets[j])).scaled_max());
        const Eigen::MatrixXd ab = jets[i].value * jets[j].value;
        const Eigen::MatrixXd ba = jets[j].value * jets[i].value;
        comm_worst = std::max(comm_worst, scaled_entry_max(ab - ba, std::max(ab.cwiseAbs().maxCoeff(),
                                                                              ba.cwiseAbs().maxCoeff())));
      }
    ring.observe(ring_worst, x);
    comm.observe(comm_worst, x);

    worst = 0.0;
    for (const auto& j : jets)
      worst = std::max(worst, symplectic_compat(j.value) / (1.0 + j.value.cwiseAbs().maxCoeff()));
    compat.observe(worst, x);
  }
  for (auto* b : {&basis, &module, &ring, &comm, &compat}) report.add(b->finish());
  return report;
}

VerificationReport joint_distribution_check(const HaantjesAlgebra& alg, const SampleSet& samples) {
  VerificationReport report("joint eigen-distributions");
  CheckBuilder structure("joint distribution structure",
                         "nontrivial intersections of generalized eigen-distributions: constant "
                         "even ranks, direct sum",
                         0.0, samples.seed);
  CheckBuilder member("generalized eigenspace membership", "(K - l I)^rho annihilates D_i", 1e-7,
                      samples.seed);
  std::vector<int> reference;
  for (const auto& x : samples.points) {
    structure.count_sample();
    member.count_sample();
    JointDecomposition d;
    try {
      d = joint_distributions(alg, x);
    } catch (const EvalError& err) {
      structure.fail(err.what(), x);
      continue;
    }
    std::vector<int> ranks;
    for (const auto& s : d.subspaces) ranks.push_back(s.rank());
    if (reference.empty()) {
      reference = ranks;
      std::string text;
      for (int r : ranks) text += (text.empty() ? "" : ",") + std::to_string(r);
      structure.note("ranks (" + text + ")");
    } else if (ranks != reference) {
      structure.fail("rank pattern changes between samples", x);
    }
    if (!d.direct_sum) structure.fail("not a direct sum", x);
    if (!d.even_ranks) structure.fail("odd-rank joint distribution", x);
    structure.observe(0.0, x);

    double worst = 0.0;
    for (const auto& k : alg.basis) {
      const Eigen::MatrixXd a = k.value(x);
      const Spectrum s = spectrum_at(a);
      const double scale = 1.0 + a.cwiseAbs().maxCoeff();
      for (const auto& c : s.clusters) {
        Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
        const Eigen::MatrixXcd m = a.cast<cd>() - c.value * Eigen::MatrixXcd::Identity(a.rows(), a.cols());
        for (int r = 0; r < c.riesz_index; ++r) p = p * m;
        if (c.basis.cols() > 0)
          worst = std::max(worst, (p * c.basis).cwiseAbs().maxCoeff() /
                                      std::pow(scale, c.riesz_index));
      }
    }
    member.observe(worst, x);
  }
  report.add(structure.finish());
  report.add(member.finish());
  return report;
}

VerificationReport eigenvalue_check(const OperatorField& a, std::span<const EigenCandidate> cands,
                                    const SampleSet& samples, double tol,
                                    int minimal_polynomial_degree) {
  VerificationReport report("eigenvalue fields");
  CheckBuilder b("eigenvalues match candidate fields",
                 "eigenvalues, multiplicities and Riesz indices", tol, samples.seed);
  for (const auto& x : samples.points) {
    b.count_sample();
    try {
      const Spectrum s = spectrum_at(a, x);
      std::vector<bool> used(s.clusters.size(), false);
      double worst = 0.0;
      for (const auto& cand : cands) {
        const double lc = eval(cand.value, x);
        int best = -1;
        for (std::size_t i = 0; i < s.clusters.size(); ++i)
          if (!used[i] && (best < 0 || std::abs(s.clusters[i].value - lc) <
                                           std::abs(s.clusters[best].value - lc)))
            best = static_cast<int>(i);
        if (best < 0) {
          b.fail("no eigenvalue left for candidate " + print(cand.value), x);
          continue;
        }
        used[best] = true;
        const auto& c = s.clusters[best];
        worst = std::max(worst, std::abs(c.value - lc) / (1.0 + std::abs(lc)));
        if (c.algebraic_multiplicity != cand.multiplicity)
          b.fail("multiplicity " + std::to_string(c.algebraic_multiplicity) + " for candidate " +
                     print(cand.value) + ", expected " + std::to_string(cand.multiplicity),
                 x);
        if (cand.riesz_index > 0 && c.riesz_index != cand.riesz_index)
          b.fail("Riesz index " + std::to_string(c.riesz_index) + " for candidate " +
                     print(cand.value) + ", expected " + std::to_string(cand.riesz_index),
                 x);
      }
      for (std::size_t i = 0; i < used.size(); ++i)
        if (!used[i]) b.fail("unmatched eigenvalue " + format_value(s.clusters[i].value), x);
      if (minimal_polynomial_degree > 0 && s.minimal_polynomial_degree != minimal_polynomial_degree)
        b.fail("minimal polynomial degree " + std::to_string(s.minimal_polynomial_degree) +
                   ", expected " + std::to_string(minimal_polynomial_degree),
               x);
      b.observe(worst, x);
    } catch (const EvalError& err) {
      b.fail(err.what(), x);
    }
  }
  report.add(b.finish());
  return report;
}

}  // namespace haantjes
