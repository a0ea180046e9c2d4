#include <cfm/error.hpp>
#include <cfm/spectral.hpp>

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

namespace cfm {

namespace {

double one_norm(const Eigen::SparseMatrix<double>& W)
{
    double best = 0.0;
    for (Eigen::Index c = 0; c < W.outerSize(); ++c) {
        double sum = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(W, c); it; ++it) sum += std::abs(it.value());
        best = std::max(best, sum);
    }
    return best;
}

void apply_sign_convention(Eigen::MatrixXd& phi)
{
    for (Eigen::Index c = 0; c < phi.cols(); ++c) {
        Eigen::Index arg = 0;
        phi.col(c).cwiseAbs().maxCoeff(&arg);
        if (phi(arg, c) < 0.0) phi.col(c) *= -1.0;
    }
}

SpectralBasis dense_basis(const LaplacianPair& lap, int k)
{
    const Eigen::MatrixXd W = Eigen::MatrixXd(lap.stiffness);
    const Eigen::MatrixXd M = lap.mass.asDiagonal();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(W, M, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    require(solver.info() == Eigen::Success, Errc::no_convergence, "dense generalized eigensolver failed");
    SpectralBasis basis;
    basis.phi = solver.eigenvectors().leftCols(k);
    basis.lambda = solver.eigenvalues().head(k);
    basis.mass = lap.mass;
    return basis;
}

// M-orthonormalizes the columns of X in place via Householder QR of M^{1/2} X.
void m_orthonormalize(Eigen::MatrixXd& X, const Eigen::VectorXd& sqrt_mass)
{
    const Eigen::MatrixXd Z = sqrt_mass.asDiagonal() * X;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(X.rows(), X.cols());
    X = sqrt_mass.cwiseInverse().asDiagonal() * Q;
}

} // namespace

LaplacianPair cotan_laplacian(const TriMesh& mesh)
{
    const auto& V = mesh.vertices();
    const auto& F = mesh.triangles();
    const int n = mesh.num_vertices();

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(F.rows()) * 12);
    for (Eigen::Index t = 0; t < F.rows(); ++t) {
        for (int c = 0; c < 3; ++c) {
            // Corner c is opposite the edge (a, b).
            const int o = F(t, c), a = F(t, (c + 1) % 3), b = F(t, (c + 2) % 3);
            const Eigen::Vector3d u = V.row(a) - V.row(o);
            const Eigen::Vector3d v = V.row(b) - V.row(o);
            const double cross = u.cross(v).norm();
            const double dot = u.dot(v);
            if (std::atan2(cross, dot) < 1e-6) {
                fail(Errc::degenerate_triangle, "triangle " + std::to_string(t) + " has an angle below 1e-6 rad");
            }
            const double half_cot = 0.5 * dot / cross;
            entries.emplace_back(a, b, -half_cot);
            entries.emplace_back(b, a, -half_cot);
            entries.emplace_back(a, a, half_cot);
            entries.emplace_back(b, b, half_cot);
        }
    }
    LaplacianPair out;
    out.stiffness.resize(n, n);
    out.stiffness.setFromTriplets(entries.begin(), entries.end());
    out.stiffness.makeCompressed();
    out.mass = vertex_areas(mesh);
    return out;
}

SpectralBasis compute_basis(const LaplacianPair& lap, int k, const EigenOptions& options)
{
    const int n = static_cast<int>(lap.mass.size());
    require(lap.stiffness.rows() == n && lap.stiffness.cols() == n, Errc::dimension_mismatch,
            "stiffness and mass sizes differ");
    require(k >= 1 && k <= n, Errc::invalid_argument,
            "basis size " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    require((lap.mass.array() > 0.0).all(), Errc::invalid_argument, "mass matrix must be strictly positive");

    const int block = std::min(n, std::max(2 * k, k + 16));
    if (n <= options.dense_limit || block >= n) {
        SpectralBasis basis = dense_basis(lap, k);
        apply_sign_convention(basis.phi);
        return basis;
    }

    const Eigen::SparseMatrix<double>& W = lap.stiffness;
    const Eigen::SparseMatrix<double> shifted = W - options.shift * Eigen::SparseMatrix<double>(lap.mass.asDiagonal());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(shifted);
    require(factor.info() == Eigen::Success, Errc::no_convergence, "factorization of the shifted operator failed");

    const Eigen::VectorXd sqrt_mass = lap.mass.cwiseSqrt();
    const double w_norm = one_norm(W);

    // The constant function spans the kernel of a connected surface. It is
    // taken out of the iteration: near σ = 0 the solve amplifies it by ~1/|σ|
    // and would swamp every other direction.
    const Eigen::VectorXd constant = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(lap.mass.sum()));
    auto deflate = [&](Eigen::MatrixXd& Y) {
        Y -= constant * (constant.transpose() * (lap.mass.asDiagonal() * Y));
    };
    const int rest = k - 1;

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd X(n, block - 1);
    for (Eigen::Index c = 0; c < X.cols(); ++c)
        for (Eigen::Index r = 0; r < X.rows(); ++r) X(r, c) = normal(rng);
    deflate(X);
    m_orthonormalize(X, sqrt_mass);

    auto assemble = [&](const Eigen::VectorXd& theta) {
        SpectralBasis basis;
        basis.phi.resize(n, k);
        basis.lambda.resize(k);
        basis.phi.col(0) = constant;
        basis.lambda[0] = constant.dot(W * constant);
        basis.phi.rightCols(rest) = X.leftCols(rest);
        basis.lambda.tail(rest) = theta.head(rest);
        basis.mass = lap.mass;
        apply_sign_convention(basis.phi);
        return basis;
    };
    if (rest == 0) return assemble(Eigen::VectorXd());

    Eigen::VectorXd theta;
    double worst = 0.0;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        const Eigen::MatrixXd rhs = lap.mass.asDiagonal() * X;
        X = factor.solve(rhs);
        deflate(X);
        m_orthonormalize(X, sqrt_mass);

        const Eigen::MatrixXd WX = W * X;
        Eigen::MatrixXd H = X.transpose() * WX;
        H = 0.5 * (H + H.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(H);
        X = X * ritz.eigenvectors();
        theta = ritz.eigenvalues();

        const Eigen::MatrixXd residual =
            W * X.leftCols(rest) - lap.mass.asDiagonal() * X.leftCols(rest) * theta.head(rest).asDiagonal();
        worst = 0.0;
        for (int c = 0; c < rest; ++c) worst = std::max(worst, residual.col(c).norm() / (w_norm * X.col(c).norm()));
        if (worst <= options.tolerance) return assemble(theta);
    }
    std::ostringstream msg;
    msg << "subspace iteration did not converge in " << options.max_iterations
        << " iterations; worst backward error " << worst;
    fail(Errc::no_convergence, msg.str());
}

SpectralBasis compute_basis(const TriMesh& mesh, int k, const EigenOptions& options)
{
    return compute_basis(cotan_laplacian(mesh), k, options);
}

Eigen::VectorXd eigen_residuals(const LaplacianPair& lap, const SpectralBasis& basis)
{
    const double w_norm = one_norm(lap.stiffness);
    const Eigen::MatrixXd residual =
        lap.stiffness * basis.phi - lap.mass.asDiagonal() * basis.phi * basis.lambda.asDiagonal();
    Eigen::VectorXd out(basis.k());
    for (int c = 0; c < basis.k(); ++c) out[c] = residual.col(c).norm() / (w_norm * basis.phi.col(c).norm());
    return out;
}

CoeffMatrix project(const SpectralBasis& basis, const Eigen::MatrixXd& signals, std::string shape_id)
{
    require(signals.rows() == basis.n(), Errc::dimension_mismatch,
            "signal has " + std::to_string(signals.rows()) + " rows, basis has " + std::to_string(basis.n()));
    return {basis.phi.transpose() * (basis.mass.asDiagonal() * signals), std::move(shape_id)};
}

Eigen::MatrixXd reconstruct(const SpectralBasis& basis, const Eigen::MatrixXd& coeffs)
{
    require(coeffs.rows() == basis.k(), Errc::dimension_mismatch,
            "coefficients have " + std::to_string(coeffs.rows()) + " rows, basis has k=" + std::to_string(basis.k()));
    return basis.phi * coeffs;
}

Eigen::MatrixXd reconstruct(const SpectralBasis& basis, const CoeffMatrix& coeffs)
{
    return reconstruct(basis, coeffs.values);
}

} // namespace cfm
