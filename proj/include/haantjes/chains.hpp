#pragma once

#include <span>
#include <string>
#include <vector>

#include "haantjes/algebra.hpp"
#include "haantjes/report.hpp"
#include "haantjes/sampling.hpp"
#include "haantjes/tensor.hpp"

namespace haantjes {

/// theta = K^T dH; returns max |d_i theta_j - d_j theta_i| at x.
double chain_closedness(const OperatorField& k, const Expression& h, std::span<const double> x);

/// Passes iff K^T dH - dH_target vanishes at every sample. The residual is
/// max |.| / (1 + largest |K^j_i d_j H| or |d_i H_target|).
VerificationReport chain_verify(const OperatorField& k, const Expression& h,
                                const Expression& target, const SampleSet& samples,
                                double tol = 1e-9, const std::string& label = "K");

/// Diagonal chain operator with q- and p-slot i equal to
/// (dH_alpha/dp_i) / (dH/dp_i). Slots where dH_alpha/dp_i is identically zero
/// are zero. Throws ConstructionError when dH/dp_i vanishes identically or at
/// a sample while dH_alpha/dp_i does not, or when the result fails
/// chain_verify / the Haantjes torsion test on the samples.
OperatorField build_ksov(const Expression& h, const Expression& h_alpha, const SampleSet& samples,
                         double tol = 1e-9);

/// Rank of span{K_a^T dH} against span{dH_1..dH_m}, plus mutual containment.
VerificationReport codistribution_check(const HaantjesAlgebra& alg, const Expression& h,
                                        std::span<const Expression> hamiltonians,
                                        const SampleSet& samples, double rank_tol = 1e-9);

/// Integral of theta = K^T dH along the coordinate path from `base` to `x`
/// (one coordinate at a time, Gauss-Legendre). Only meaningful when theta is
/// closed on a box containing the path.
double chain_potential(const OperatorField& k, const Expression& h, std::span<const double> base,
                       std::span<const double> x, int segments = 16);

}  // namespace haantjes
