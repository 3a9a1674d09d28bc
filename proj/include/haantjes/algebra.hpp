#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "haantjes/report.hpp"
#include "haantjes/sampling.hpp"
#include "haantjes/tensor.hpp"

namespace haantjes {

struct HaantjesAlgebra {
  ChartPtr chart;
  std::vector<OperatorField> basis;
  std::vector<std::string> names;  // optional labels, defaults K1..Km

  HaantjesAlgebra(ChartPtr chart, std::vector<OperatorField> basis,
                  std::vector<std::string> names = {});
  int rank() const { return static_cast<int>(basis.size()); }
};

/// One cluster of numerically equal eigenvalues.
struct EigenCluster {
  std::complex<double> value;  // cluster mean
  int algebraic_multiplicity = 0;
  int geometric_multiplicity = 0;
  int riesz_index = 0;
  Eigen::MatrixXcd basis;  // columns span ker (A - value I)^riesz_index
  bool is_real() const { return value.imag() == 0.0; }
};

struct Spectrum {
  std::vector<EigenCluster> clusters;  // ordered by (real, imag) ascending
  int minimal_polynomial_degree = 0;
  bool even_ranks = true;
  std::vector<std::string> warnings;

  bool semisimple() const;
};

/// Default clustering tolerance 1e-7 (1 + spectral radius).
double default_cluster_tol(const Eigen::MatrixXd& a);

/// Pointwise spectral analysis; cluster_tol <= 0 selects the default.
Spectrum spectrum_at(const Eigen::MatrixXd& a, double cluster_tol = 0.0);
Spectrum spectrum_at(const OperatorField& a, std::span<const double> x, double cluster_tol = 0.0);

bool semisimple_at(const OperatorField& a, std::span<const double> x, double cluster_tol = 0.0);

/// Numerical rank with threshold rel_tol * (largest singular value).
int numerical_rank(const Eigen::MatrixXcd& m, double rel_tol = 1e-9);
/// Orthonormal basis of the intersection of two column spans.
Eigen::MatrixXcd intersect_spans(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v,
                                 double tol = 1e-6);

struct JointDistribution {
  std::vector<std::complex<double>> eigenvalues;  // one per basis operator
  Eigen::MatrixXcd basis;
  int rank() const { return static_cast<int>(basis.cols()); }
};

struct JointDecomposition {
  std::vector<JointDistribution> subspaces;  // descending rank, then eigenvalue tuple
  bool direct_sum = true;
  bool even_ranks = true;
  std::vector<std::string> warnings;
};

/// Nontrivial intersections of the generalized eigenspaces of all basis
/// operators at x.
JointDecomposition joint_distributions(const HaantjesAlgebra& alg, std::span<const double> x,
                                       double cluster_tol = 0.0);
JointDecomposition joint_distributions(std::span<const Eigen::MatrixXd> values,
                                       double cluster_tol = 0.0);

/// Torsion of basis ops, of `trials` random combinations f K_i + g K_j
/// (f, g random affine functions), of pairwise products, commutators and
/// symplectic compatibility.
VerificationReport verify_algebra(const HaantjesAlgebra& alg, const SampleSet& samples,
                                  int trials = 8, double tol = 1e-9);

/// Rank pattern of the joint decomposition is constant, even and a direct sum
/// across the samples.
VerificationReport joint_distribution_check(const HaantjesAlgebra& alg, const SampleSet& samples);

struct EigenCandidate {
  Expression value;
  int multiplicity = 1;
  int riesz_index = 0;  // 0: not checked
};

/// Matches the clusters of A at every sample against candidate eigenvalue
/// fields; residual |lambda - candidate| / (1 + |candidate|).
VerificationReport eigenvalue_check(const OperatorField& a, std::span<const EigenCandidate> cands,
                                    const SampleSet& samples, double tol = 1e-8,
                                    int minimal_polynomial_degree = 0);

}  // namespace haantjes
