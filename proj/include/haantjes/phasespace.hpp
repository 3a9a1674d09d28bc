#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "haantjes/expr.hpp"
#include "haantjes/report.hpp"
#include "haantjes/sampling.hpp"

namespace haantjes {

inline constexpr double kDefaultTolerance = 1e-9;

/// Constant Darboux matrix [[0, -I], [I, 0]] in the (q..., p...) ordering.
class SymplecticMatrix {
 public:
  explicit SymplecticMatrix(int n);
  const Eigen::MatrixXd& matrix() const { return omega_; }
  /// Omega^{-1} = -Omega = [[0, I], [-I, 0]].
  Eigen::MatrixXd inverse() const { return -omega_; }
  int n() const { return n_; }

 private:
  int n_;
  Eigen::MatrixXd omega_;
};

/// Sum over k of df/dq^k dg/dp_k - df/dp_k dg/dq^k.
double poisson_bracket(const Expression& f, const Expression& g, std::span<const double> x,
                       std::span<const double> params = {});

/// Bracket restricted to the conjugate pairs of block a (0-based).
double partial_bracket(const Expression& f, const Expression& g, int block,
                       std::span<const double> x, std::span<const double> params = {});

/// Single conjugate-pair term k of the bracket, from precomputed gradients.
double bracket_term(std::span<const double> df, std::span<const double> dg, int n, int k);

/// Each term and pair is checked at each sample; the residual of a group of
/// terms is |sum| / (1 + max |product|).
VerificationReport t_involution_check(std::span<const Expression> hamiltonians,
                                      const SampleSet& samples, double tol = kDefaultTolerance,
                                      std::span<const double> params = {});
VerificationReport p_involution_check(std::span<const Expression> hamiltonians,
                                      const SampleSet& samples, double tol = kDefaultTolerance,
                                      std::span<const double> params = {});
VerificationReport full_involution_check(std::span<const Expression> hamiltonians,
                                         const SampleSet& samples,
                                         double tol = kDefaultTolerance,
                                         std::span<const double> params = {});

/// det [dH_i / dp_k] for exactly n Hamiltonians.
double vertical_independence(std::span<const Expression> hamiltonians, std::span<const double> x,
                             std::span<const double> params = {});

/// Gradient of e at x as an Eigen vector.
Eigen::VectorXd gradient(const Expression& e, std::span<const double> x,
                         std::span<const double> params = {});

}  // namespace haantjes
