#include <cfm/error.hpp>
#include <cfm/fmap.hpp>
#include <cfm/parallel.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace cfm {

double row_rank_condition(const Eigen::MatrixXd& A)
{
    const Eigen::MatrixXd gram = A * A.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0.0 || hi <= 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

FmregLayer::FmregLayer(const Eigen::MatrixXd& A1, const Eigen::MatrixXd& A2, const Eigen::VectorXd& L1,
                       const Eigen::VectorXd& L2, double lam)
    : m_A1(A1)
    , m_A2(A2)
{
    const Eigen::Index k = A1.rows();
    require(A2.rows() == k && A1.cols() == A2.cols(), Errc::dimension_mismatch,
            "coefficient matrices must both be k x d");
    require(L1.size() == k && L2.size() == k, Errc::dimension_mismatch, "eigenvalue vectors must have length k");
    require(lam >= 0.0, Errc::invalid_argument, "regularization weight must be nonnegative");

    const Eigen::MatrixXd gram = A1 * A1.transpose();
    const Eigen::MatrixXd rhs = A1 * A2.transpose(); // column i is the right-hand side of row i
    const double spread = std::max(std::abs(L1.maxCoeff() - L2.minCoeff()), std::abs(L2.maxCoeff() - L1.minCoeff()));
    const double scale = std::max(gram.diagonal().maxCoeff(), lam * spread * spread);

    m_C.resize(k, k);
    m_factors.resize(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::MatrixXd system = gram;
        system.diagonal() += lam * (L1.array() - L2[i]).square().matrix();
        auto& llt = m_factors[static_cast<std::size_t>(i)];
        llt.compute(system);
        const double pivot = llt.info() == Eigen::Success ? llt.matrixLLT().diagonal().minCoeff() : 0.0;
        if (!(pivot * pivot > 1e-14 * scale)) {
            fail(Errc::singular_system, "functional map row " + std::to_string(i) +
                                            " is undetermined (rank-deficient descriptors without regularization)");
        }
        m_C.row(i) = llt.solve(rhs.col(i)).transpose();
    }

    const Eigen::ArrayXXd diff = L1.transpose().replicate(k, 1).array() - L2.replicate(1, k).array();
    m_objective = (m_C * A1 - A2).squaredNorm() + lam * (m_C.array().square() * diff.square()).sum();
    m_condition = row_rank_condition(A1);
}

void FmregLayer::backward(const Eigen::MatrixXd& grad_C, Eigen::MatrixXd& grad_A1, Eigen::MatrixXd& grad_A2) const
{
    const Eigen::Index k = m_C.rows();
    Eigen::MatrixXd mu(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        mu.col(i) = m_factors[static_cast<std::size_t>(i)].solve(grad_C.row(i).transpose());
    }
    const Eigen::MatrixXd grad_gram = -mu * m_C;
    grad_A1 += (grad_gram + grad_gram.transpose()) * m_A1 + mu * m_A2;
    grad_A2 += mu.transpose() * m_A1;
}

FmregResult solve_fmreg(const CoeffMatrix& A1, const CoeffMatrix& A2, const Eigen::VectorXd& L1,
                        const Eigen::VectorXd& L2, double lam)
{
    const FmregLayer layer(A1.values, A2.values, L1, L2, lam);
    return {{layer.map(), A1.shape_id, A2.shape_id}, layer.objective(), layer.condition()};
}

double loss_descriptor(const FunctionalMap& C, const CoeffMatrix& A1, const CoeffMatrix& A2)
{
    require(C.values.cols() == A1.k() && C.values.rows() == A2.k() && A1.d() == A2.d(), Errc::dimension_mismatch,
            "descriptor loss operands disagree in size");
    return (C.values * A1.values - A2.values).squaredNorm();
}

double loss_orthogonality(const FunctionalMap& C)
{
    require(C.values.rows() == C.values.cols(), Errc::dimension_mismatch, "functional map must be square");
    const Eigen::Index k = C.values.rows();
    return (C.values.transpose() * C.values - Eigen::MatrixXd::Identity(k, k)).squaredNorm();
}

double loss_laplacian_commutativity(const FunctionalMap& C, const Eigen::VectorXd& L1, const Eigen::VectorXd& L2)
{
    const Eigen::Index k = C.values.rows();
    require(C.values.cols() == k && L1.size() == k && L2.size() == k, Errc::dimension_mismatch,
            "eigenvalue vectors must match the map size");
    double total = 0.0;
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) {
            const double gap = L1[j] - L2[i];
            total += C.values(i, j) * C.values(i, j) * gap * gap;
        }
    return total;
}

double loss_bijectivity(const FunctionalMap& C12, const FunctionalMap& C21)
{
    require(C12.values.rows() == C21.values.cols() && C12.values.cols() == C21.values.rows(),
            Errc::dimension_mismatch, "bijectivity operands disagree in size");
    if (!C12.source_id.empty() || !C21.source_id.empty()) {
        require(C12.source_id == C21.target_id && C12.target_id == C21.source_id, Errc::invalid_argument,
                "bijectivity needs maps in opposite directions");
    }
    const Eigen::Index k = C12.values.cols();
    return (C21.values * C12.values - Eigen::MatrixXd::Identity(k, k)).squaredNorm();
}

double off_diagonal_fraction(const Eigen::MatrixXd& C)
{
    const double total = C.squaredNorm();
    if (total == 0.0) return 0.0;
    return std::max(0.0, total - C.diagonal().squaredNorm()) / total;
}

std::vector<int> nearest_rows(const Eigen::MatrixXd& database, const Eigen::MatrixXd& queries)
{
    require(database.cols() == queries.cols(), Errc::dimension_mismatch, "embedding widths differ");
    require(database.rows() > 0, Errc::invalid_argument, "empty nearest-neighbor database");
    const RowMatrix db = database;
    const RowMatrix qs = queries;
    std::vector<int> out(static_cast<std::size_t>(qs.rows()));
    parallel_for(0, qs.rows(), [&](std::ptrdiff_t q) {
        int best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (Eigen::Index p = 0; p < db.rows(); ++p) {
            const double dist = (db.row(p) - qs.row(q)).squaredNorm();
            if (dist < best_dist) {
                best_dist = dist;
                best = static_cast<int>(p);
            }
        }
        out[static_cast<std::size_t>(q)] = best;
    });
    return out;
}

PointMap fmap_to_pointmap(const FunctionalMap& C, const SpectralBasis& basis_src, const SpectralBasis& basis_tgt,
                          Extraction direction)
{
    require(C.values.rows() == C.values.cols() && C.values.rows() == basis_src.k() && C.values.rows() == basis_tgt.k(),
            Errc::dimension_mismatch, "functional map size does not match the bases");
    const Eigen::MatrixXd pulled = basis_tgt.phi * C.values;
    PointMap out;
    if (direction == Extraction::PullbackRows) {
        out.assignment = nearest_rows(basis_src.phi, pulled);
        out.n_to = basis_src.n();
        out.from_id = C.target_id;
        out.to_id = C.source_id;
    } else {
        out.assignment = nearest_rows(pulled, basis_src.phi);
        out.n_to = basis_tgt.n();
        out.from_id = C.source_id;
        out.to_id = C.target_id;
    }
    return out;
}

} // namespace cfm
