#pragma once

#include <cfm/spectral.hpp>

#include <Eigen/Core>

namespace cfm {

/// Wave Kernel Signature descriptors, one column per log-energy sample.
/// Each column is rescaled to mean 1 over the vertices.
struct DescriptorSet
{
    Eigen::MatrixXd values;   // n × d
    Eigen::VectorXd energies; // d log-energies
    double sigma = 0.0;
};

/// WKS over the non-constant eigenpairs (index ≥ 1). Energies are spaced
/// uniformly on [log λ₂ + 2σ, log λ_k − 2σ] with σ equal to 7 grid spacings.
DescriptorSet wks(const SpectralBasis& basis, int d);

} // namespace cfm
