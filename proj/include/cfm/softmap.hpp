#pragma once

#include <cfm/spectral.hpp>
#include <cfm/types.hpp>

#include <Eigen/Core>

#include <string>
#include <utility>

namespace cfm {

/// Linear sharpness curriculum: α(epoch) = alpha0 + step·epoch.
struct AlphaSchedule
{
    double alpha0 = 1.0;
    double step = 5.0;
    /// Pairs per epoch; 0 means one pass over the training pair list.
    int epoch_len = 0;
};

double alpha_at(const AlphaSchedule& schedule, int epoch);

/// Φ A: the shape's spectral embedding expressed in the latent frame.
Eigen::MatrixXd aligned_embedding(const SpectralBasis& basis, const CoeffMatrix& coeffs);

/// Materialized row-stochastic soft map Π (n_target × n_source).
struct SoftMap
{
    Eigen::MatrixXd weights;
    double alpha = 0.0;
    std::string from_id; // shape whose vertices index the rows
    std::string to_id;   // shape whose vertices index the columns
};

inline constexpr Eigen::Index kDefaultBlockRows = 1024;

/// Produces rows of Π on demand without materializing the whole matrix.
///
/// Row q is softmax(−α δ_q·) with δ_qp = ‖emb_src[p] − emb_tgt[q]‖, evaluated
/// with row-minimum subtraction.
class SoftMapStream
{
public:
    SoftMapStream(const Eigen::MatrixXd& emb_src, const Eigen::MatrixXd& emb_tgt, double alpha);

    Eigen::Index rows() const { return m_tgt.rows(); }
    Eigen::Index cols() const { return m_src.rows(); }
    double alpha() const { return m_alpha; }

    /// δ for target rows [q0, q1) into out ((q1 − q0) × cols).
    void residual_block(Eigen::Index q0, Eigen::Index q1, RowMatrix& out) const;
    /// Π for target rows [q0, q1).
    void block(Eigen::Index q0, Eigen::Index q1, RowMatrix& out) const;

private:
    RowMatrix m_src;
    RowMatrix m_tgt;
    double m_alpha;
};

/// In place: each row of residuals becomes softmax(−α row).
void softmax_rows(RowMatrix& residuals, double alpha);

SoftMap soft_correspondence(const Eigen::MatrixXd& emb_src, const Eigen::MatrixXd& emb_tgt, double alpha,
                            std::string from_id = {}, std::string to_id = {});

/// C₂ = Φ_tgtᵀ M_tgt Π Φ_src, accumulated over row blocks of Π.
FunctionalMap softmap_to_fmap(const SoftMap& pi, const SpectralBasis& basis_src, const SpectralBasis& basis_tgt,
                              Eigen::Index block_rows = kDefaultBlockRows);
FunctionalMap softmap_to_fmap(const SoftMapStream& pi, const SpectralBasis& basis_src,
                              const SpectralBasis& basis_tgt, Eigen::Index block_rows = kDefaultBlockRows);

/// Right singular vectors of A (d × d, descending) and the squared singular
/// values padded with zeros to length d.
struct RightSingularBasis
{
    Eigen::MatrixXd V;
    Eigen::VectorXd squared_values;
};

RightSingularBasis right_singular_basis(const Eigen::MatrixXd& A);

/// (A₁V̂, A₂V̂) with V̂ the leading m right singular vectors of A₁.
std::pair<CoeffMatrix, CoeffMatrix> feature_svd_truncate(const CoeffMatrix& A1, const CoeffMatrix& A2, int m);

} // namespace cfm
