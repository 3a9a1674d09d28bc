#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "haantjes/report.hpp"
#include "haantjes/sampling.hpp"
#include "haantjes/tensor.hpp"

namespace haantjes {

/// Coordinate change between two charts of the same dimension. `forward`
/// gives the new coordinates as expressions on the source chart, `inverse`
/// the old coordinates as expressions on the target chart.
struct ChartMap {
  ChartPtr source;
  ChartPtr target;
  std::vector<Expression> forward;
  std::vector<Expression> inverse;

  ChartMap(std::vector<Expression> forward, std::vector<Expression> inverse);

  std::vector<double> to_target(std::span<const double> x_old) const;
  std::vector<double> to_source(std::span<const double> x_new) const;
  /// d(new)/d(old) at a source point.
  Eigen::MatrixXd jacobian(std::span<const double> x_old) const;

  /// f o inverse: a source-chart function written on the target chart.
  Expression push_function(const Expression& f) const;
  /// g o forward: a target-chart function written on the source chart.
  Expression pull_function(const Expression& g) const;

  /// this followed by `next`.
  ChartMap then(const ChartMap& next) const;
};

/// Round trip in both directions first, then {Q^a, P_b} = delta and
/// {Q, Q} = {P, P} = 0 evaluated in the source chart. Samples live in the
/// source chart.
VerificationReport canonicity_check(const ChartMap& map, const SampleSet& samples,
                                    double tol = 1e-9);

/// J A J^{-1} at x_old = inverse(x_new). Throws EvalError when J is singular.
Eigen::MatrixXd pushforward_operator(const OperatorField& a, const ChartMap& map,
                                     std::span<const double> x_new);

struct BlockMatrices {
  Eigen::MatrixXd a, b, c, d;  // (q,q), (q,p), (p,q), (p,p) slots of one block
};

struct BlockDecomposition {
  std::vector<BlockMatrices> blocks;
  double scale = 0.0;         // largest in-block entry
  double off_block = 0.0;     // largest off-block entry / (1 + scale)
  double compatibility = 0.0; // max of |D^T - A|, |B + B^T|, |C + C^T|
  std::vector<std::string> violations;
};

/// Splits a matrix in the chart ordering into per-block A, B, C, D and
/// records off-block and compatibility violations above tol.
BlockDecomposition block_check(const Eigen::MatrixXd& k, const Chart& chart, double tol = 1e-9);

struct BlockCommutation {
  double aa = 0.0;       // [A^a, A^b] + B^a C^b - B^b C^a
  double ab = 0.0;       // A^a B^b - A^b B^a + B^a (A^b)^T - B^b (A^a)^T
  double ca = 0.0;       // C^a A^b - C^b A^a + (A^a)^T C^b - (A^b)^T C^a
  double ab_skew = 0.0;  // symmetric part of A^a B^b - A^b B^a
  double ca_skew = 0.0;  // symmetric part of C^a A^b - C^b A^a
  double scale = 1.0;    // 1 + product of the largest block entries
};

/// Residuals of the block relations for one pair, maximised over blocks.
BlockCommutation block_commutation(const BlockDecomposition& ka, const BlockDecomposition& kb);

/// Block form and compatibility of every pushed operator, and the
/// commutation relations for every pair, at target-chart samples. Residuals
/// of the commutation relations are divided by BlockCommutation::scale.
VerificationReport block_commutation_check(std::span<const OperatorField> ops,
                                           std::span<const std::string> names,
                                           const ChartMap& map, const SampleSet& target_samples,
                                           double tol = 1e-9);

struct FlowResult {
  std::vector<double> drift;  // max |I(x(t)) - I(x0)| per invariant
  std::vector<double> final_point;
  int steps = 0;
};

/// Implicit midpoint integration of Hamilton's equations of h with Newton
/// inner iterations. Throws Error naming the step when Newton stalls.
FlowResult flow_conserve(const Expression& h, std::span<const Expression> invariants,
                         std::span<const double> x0, double t_end, double dt,
                         double newton_tol = 1e-12);

}  // namespace haantjes
