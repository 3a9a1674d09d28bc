#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "haantjes/expr.hpp"
#include "haantjes/report.hpp"
#include "haantjes/sampling.hpp"

namespace haantjes {

/// (1,1)-tensor field as a 2n x 2n matrix of expressions; entry (i, j) is
/// A^i_j (row = upper index).
class OperatorField {
 public:
  /// `entries` is row-major with exactly (2n)^2 elements.
  OperatorField(ChartPtr chart, std::vector<Expression> entries);

  static OperatorField identity(ChartPtr chart);
  static OperatorField zero(ChartPtr chart);
  /// Diagonal operator with the given 2n diagonal entries.
  static OperatorField diagonal(ChartPtr chart, std::vector<Expression> diag);

  int dim() const { return dim_; }
  const ChartPtr& chart() const { return chart_; }
  const Expression& operator()(int i, int j) const { return entries_[i * dim_ + j]; }
  const std::vector<Expression>& entries() const { return entries_; }

  Eigen::MatrixXd value(std::span<const double> x) const;

 private:
  ChartPtr chart_;
  int dim_;
  std::vector<Expression> entries_;
};

/// Value and first partial derivatives of an operator at a point;
/// d[l](i, j) = d A^i_j / d x^l.
struct OperatorJet {
  Eigen::MatrixXd value;
  std::vector<Eigen::MatrixXd> d;

  int dim() const { return static_cast<int>(value.rows()); }
};

OperatorJet operator_jet(const OperatorField& a, std::span<const double> x);
OperatorJet constant_jet(const Eigen::MatrixXd& value);
/// f A + g B with scalar jets f, g.
OperatorJet combine(const Jet1& f, const OperatorJet& a, const Jet1& g, const OperatorJet& b);
OperatorJet compose(const OperatorJet& a, const OperatorJet& b);

/// T^i_{jk} at one point; antisymmetric in (j, k) by construction.
class Torsion3 {
 public:
  explicit Torsion3(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}

  int dim() const { return dim_; }
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }
  /// Writes T^i_{jk} and T^i_{kj} = -T^i_{jk} (j != k).
  void set(int i, int j, int k, double v) {
    data_[index(i, j, k)] = v;
    data_[index(i, k, j)] = -v;
  }
  /// Writes the same value in both slots (magnitude tensors).
  void set_symmetric(int i, int j, int k, double v) {
    data_[index(i, j, k)] = v;
    data_[index(i, k, j)] = v;
  }
  double max_abs() const;
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dim_ + j) * dim_ + k;
  }
  int dim_;
  std::vector<double> data_;
};

/// Torsion together with the same formula applied to absolute values, used
/// to scale residuals as |T| / (1 + |T|_abs).
struct ScaledTorsion {
  Torsion3 value;
  Torsion3 magnitude;
  double scaled_max() const;
};

ScaledTorsion nijenhuis_torsion_scaled(const OperatorJet& a);
ScaledTorsion haantjes_torsion_scaled(const OperatorJet& a);

Torsion3 nijenhuis_torsion(const OperatorJet& a);
Torsion3 haantjes_torsion(const OperatorJet& a);
Torsion3 nijenhuis_torsion(const OperatorField& a, std::span<const double> x);
Torsion3 haantjes_torsion(const OperatorField& a, std::span<const double> x);

/// max |Omega A - A^T Omega| at x.
double symplectic_compat(const Eigen::MatrixXd& a);
double symplectic_compat(const OperatorField& a, std::span<const double> x);

// Expression-level algebra; entries are built with the folding builders.
OperatorField op_combine(const Expression& f, const OperatorField& a, const Expression& g,
                         const OperatorField& b);
OperatorField op_compose(const OperatorField& a, const OperatorField& b);
OperatorField op_commutator(const OperatorField& a, const OperatorField& b);
OperatorField op_scale(const Expression& f, const OperatorField& a);

enum class TorsionKind { Nijenhuis, Haantjes };

/// Scaled torsion of `a` over the samples.
VerificationReport torsion_check(const OperatorField& a, TorsionKind kind,
                                 const SampleSet& samples, double tol,
                                 const std::string& label = "A");

/// Haantjes torsion of sum_k coeffs[k] A^k (ascending powers), after first
/// confirming that A itself is a Haantjes operator on the samples.
VerificationReport poly_closure_check(const OperatorField& a, std::span<const Expression> coeffs,
                                      const SampleSet& samples, double tol);

}  // namespace haantjes
