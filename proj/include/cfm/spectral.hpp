#pragma once

#include <cfm/mesh.hpp>
#include <cfm/types.hpp>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <string>

namespace cfm {

/// Cotangent stiffness W (positive semidefinite, zero row sums) and the
/// diagonal of the lumped mass matrix M.
struct LaplacianPair
{
    Eigen::SparseMatrix<double> stiffness;
    Eigen::VectorXd mass;
};

/// Leading k generalized eigenpairs of W x = λ M x.
///
/// Columns of `phi` are M-orthonormal and ordered by nondecreasing eigenvalue.
/// Each column is signed so that its entry of largest magnitude is positive.
struct SpectralBasis
{
    Eigen::MatrixXd phi;    // n × k
    Eigen::VectorXd lambda; // k
    Eigen::VectorXd mass;   // n

    int n() const { return static_cast<int>(phi.rows()); }
    int k() const { return static_cast<int>(phi.cols()); }
};

LaplacianPair cotan_laplacian(const TriMesh& mesh);

struct EigenOptions
{
    double shift = -1e-8;
    int max_iterations = 2000;
    /// Normwise backward error ‖Wx − λMx‖ / (‖W‖₁ ‖x‖) required of every pair.
    double tolerance = 1e-12;
    /// Meshes at or below this size are solved densely.
    int dense_limit = 64;
    std::uint64_t seed = 0x5eed;
};

/// Shift-invert subspace iteration with Rayleigh-Ritz projection.
/// k == n is accepted for small meshes and solved densely.
SpectralBasis compute_basis(const LaplacianPair& laplacian, int k, const EigenOptions& options = {});
SpectralBasis compute_basis(const TriMesh& mesh, int k, const EigenOptions& options = {});

/// Per-column normwise backward errors of the eigenpairs.
Eigen::VectorXd eigen_residuals(const LaplacianPair& laplacian, const SpectralBasis& basis);

/// A = Φᵀ M G.
CoeffMatrix project(const SpectralBasis& basis, const Eigen::MatrixXd& signals, std::string shape_id = {});
/// Φ A.
Eigen::MatrixXd reconstruct(const SpectralBasis& basis, const CoeffMatrix& coeffs);
Eigen::MatrixXd reconstruct(const SpectralBasis& basis, const Eigen::MatrixXd& coeffs);

} // namespace cfm
