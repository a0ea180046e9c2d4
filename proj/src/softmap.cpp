#include <cfm/error.hpp>
#include <cfm/softmap.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace cfm {

namespace {

template <typename RowSource>
Eigen::MatrixXd accumulate_conversion(const RowSource& rows, Eigen::Index n_rows, const Eigen::MatrixXd& left_inverse,
                                      const Eigen::MatrixXd& phi_src, Eigen::Index block_rows)
{
    require(block_rows > 0, Errc::invalid_argument, "block size must be positive");
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(left_inverse.rows(), phi_src.cols());
    RowMatrix buffer;
    for (Eigen::Index q0 = 0; q0 < n_rows; q0 += block_rows) {
        const Eigen::Index q1 = std::min(n_rows, q0 + block_rows);
        rows(q0, q1, buffer);
        const Eigen::MatrixXd transported = buffer * phi_src;
        C.noalias() += left_inverse.middleCols(q0, q1 - q0) * transported;
    }
    return C;
}

} // namespace

double alpha_at(const AlphaSchedule& schedule, int epoch)
{
    require(epoch >= 0, Errc::invalid_argument, "epoch must be nonnegative");
    return schedule.alpha0 + schedule.step * epoch;
}

Eigen::MatrixXd aligned_embedding(const SpectralBasis& basis, const CoeffMatrix& coeffs)
{
    return reconstruct(basis, coeffs);
}

SoftMapStream::SoftMapStream(const Eigen::MatrixXd& emb_src, const Eigen::MatrixXd& emb_tgt, double alpha)
    : m_src(emb_src)
    , m_tgt(emb_tgt)
    , m_alpha(alpha)
{
    require(alpha > 0.0, Errc::invalid_argument, "alpha must be positive");
    require(emb_src.cols() == emb_tgt.cols(), Errc::dimension_mismatch,
            "embedding widths differ: " + std::to_string(emb_src.cols()) + " vs " + std::to_string(emb_tgt.cols()));
}

void SoftMapStream::residual_block(Eigen::Index q0, Eigen::Index q1, RowMatrix& out) const
{
    out.resize(q1 - q0, m_src.rows());
    for (Eigen::Index q = q0; q < q1; ++q) {
        out.row(q - q0) = (m_src.rowwise() - m_tgt.row(q)).rowwise().norm().transpose();
    }
}

void SoftMapStream::block(Eigen::Index q0, Eigen::Index q1, RowMatrix& out) const
{
    residual_block(q0, q1, out);
    softmax_rows(out, m_alpha);
}

void softmax_rows(RowMatrix& residuals, double alpha)
{
    // Rows are evaluated in an aligned scratch vector so vectorized exp and
    // sum see the same layout whatever the row's offset in the block. Weights
    // below e^-80 of the row maximum cannot move the row sum and are flushed to
    // zero; left alone they underflow into subnormals, which stall the FPU.
    constexpr double cutoff = 80.0;
    Eigen::VectorXd scratch(residuals.cols());
    for (Eigen::Index r = 0; r < residuals.rows(); ++r) {
        scratch = residuals.row(r).transpose();
        const double lowest = scratch.minCoeff();
        scratch = (alpha * (scratch.array() - lowest)).matrix();
        scratch = (scratch.array() < cutoff).select((-scratch.array()).exp(), 0.0).matrix();
        scratch /= scratch.sum();
        residuals.row(r) = scratch.transpose();
    }
}

SoftMap soft_correspondence(const Eigen::MatrixXd& emb_src, const Eigen::MatrixXd& emb_tgt, double alpha,
                            std::string from_id, std::string to_id)
{
    const SoftMapStream stream(emb_src, emb_tgt, alpha);
    SoftMap out;
    out.alpha = alpha;
    out.from_id = std::move(from_id);
    out.to_id = std::move(to_id);
    out.weights.resize(stream.rows(), stream.cols());
    RowMatrix buffer;
    for (Eigen::Index q0 = 0; q0 < stream.rows(); q0 += kDefaultBlockRows) {
        const Eigen::Index q1 = std::min(stream.rows(), q0 + kDefaultBlockRows);
        stream.block(q0, q1, buffer);
        out.weights.middleRows(q0, q1 - q0) = buffer;
    }
    return out;
}

FunctionalMap softmap_to_fmap(const SoftMap& pi, const SpectralBasis& basis_src, const SpectralBasis& basis_tgt,
                              Eigen::Index block_rows)
{
    require(pi.weights.rows() == basis_tgt.n() && pi.weights.cols() == basis_src.n(), Errc::dimension_mismatch,
            "soft map must be n_target x n_source");
    require(basis_src.k() == basis_tgt.k(), Errc::dimension_mismatch, "bases differ in k");
    const Eigen::MatrixXd left_inverse = basis_tgt.phi.transpose() * basis_tgt.mass.asDiagonal();
    auto rows = [&](Eigen::Index q0, Eigen::Index q1, RowMatrix& out) { out = pi.weights.middleRows(q0, q1 - q0); };
    return {accumulate_conversion(rows, pi.weights.rows(), left_inverse, basis_src.phi, block_rows), pi.to_id,
            pi.from_id};
}

FunctionalMap softmap_to_fmap(const SoftMapStream& pi, const SpectralBasis& basis_src, const SpectralBasis& basis_tgt,
                              Eigen::Index block_rows)
{
    require(pi.rows() == basis_tgt.n() && pi.cols() == basis_src.n(), Errc::dimension_mismatch,
            "soft map must be n_target x n_source");
    require(basis_src.k() == basis_tgt.k(), Errc::dimension_mismatch, "bases differ in k");
    const Eigen::MatrixXd left_inverse = basis_tgt.phi.transpose() * basis_tgt.mass.asDiagonal();
    auto rows = [&](Eigen::Index q0, Eigen::Index q1, RowMatrix& out) { pi.block(q0, q1, out); };
    return {accumulate_conversion(rows, pi.rows(), left_inverse, basis_src.phi, block_rows), {}, {}};
}

RightSingularBasis right_singular_basis(const Eigen::MatrixXd& A)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    RightSingularBasis out;
    out.V = svd.matrixV();
    out.squared_values = Eigen::VectorXd::Zero(A.cols());
    out.squared_values.head(svd.singularValues().size()) = svd.singularValues().array().square().matrix();
    return out;
}

std::pair<CoeffMatrix, CoeffMatrix> feature_svd_truncate(const CoeffMatrix& A1, const CoeffMatrix& A2, int m)
{
    require(A1.d() == A2.d(), Errc::dimension_mismatch, "coefficient matrices differ in d");
    require(m >= 1 && m <= A1.d(), Errc::invalid_argument,
            "truncation rank " + std::to_string(m) + " outside [1, " + std::to_string(A1.d()) + "]");
    const Eigen::MatrixXd V = right_singular_basis(A1.values).V.leftCols(m);
    return {CoeffMatrix{A1.values * V, A1.shape_id}, CoeffMatrix{A2.values * V, A2.shape_id}};
}

} // namespace cfm
