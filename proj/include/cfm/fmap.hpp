#pragma once

#include <cfm/spectral.hpp>
#include <cfm/types.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <vector>

namespace cfm {

/// Regularized functional-map layer.
///
/// Minimizes ‖C A₁ − A₂‖² + lam·‖C diag(L1) − diag(L2) C‖² row by row: row i
/// of C solves (A₁A₁ᵀ + lam·D_i) cᵢ = A₁ a₂ᵢ with D_i = diag_j((L1_j − L2_i)²).
/// The per-row factorizations are kept so the layer can be differentiated.
class FmregLayer
{
public:
    FmregLayer(const Eigen::MatrixXd& A1, const Eigen::MatrixXd& A2, const Eigen::VectorXd& L1,
               const Eigen::VectorXd& L2, double lam);

    const Eigen::MatrixXd& map() const { return m_C; }
    double objective() const { return m_objective; }
    /// Condition number of A₁A₁ᵀ (infinite when rank deficient).
    double condition() const { return m_condition; }

    /// Accumulates ∂L/∂A₁ and ∂L/∂A₂ given ∂L/∂C. Uses the adjoint of each
    /// symmetric row system: K μ = ḡ, then K̄ = −μ cᵀ and r̄ = μ.
    void backward(const Eigen::MatrixXd& grad_C, Eigen::MatrixXd& grad_A1, Eigen::MatrixXd& grad_A2) const;

private:
    Eigen::MatrixXd m_A1;
    Eigen::MatrixXd m_A2;
    Eigen::MatrixXd m_C;
    std::vector<Eigen::LLT<Eigen::MatrixXd>> m_factors;
    double m_objective = 0.0;
    double m_condition = 0.0;
};

struct FmregResult
{
    FunctionalMap map;
    double objective = 0.0;
    double condition = 0.0;
};

/// Full-row-rank monitor threshold on cond(A₁A₁ᵀ).
inline constexpr double kConditionWarning = 1e8;

FmregResult solve_fmreg(const CoeffMatrix& A1, const CoeffMatrix& A2, const Eigen::VectorXd& L1,
                        const Eigen::VectorXd& L2, double lam);

/// cond(A Aᵀ) for a k × d coefficient matrix.
double row_rank_condition(const Eigen::MatrixXd& A);

double loss_descriptor(const FunctionalMap& C, const CoeffMatrix& A1, const CoeffMatrix& A2);
double loss_orthogonality(const FunctionalMap& C);
double loss_laplacian_commutativity(const FunctionalMap& C, const Eigen::VectorXd& L1, const Eigen::VectorXd& L2);
/// ‖C₂₁C₁₂ − I‖². The maps must run in opposite directions.
double loss_bijectivity(const FunctionalMap& C12, const FunctionalMap& C21);

/// Off-diagonal share of ‖C‖²_F.
double off_diagonal_fraction(const Eigen::MatrixXd& C);

enum class Extraction {
    /// For each target vertex q: argmin_p ‖Φ_src[p] − (Φ_tgt C)[q]‖. Maps target → source.
    PullbackRows,
    /// For each source vertex p: argmin_q ‖(Φ_tgt C)[q] − Φ_src[p]‖. Maps source → target.
    ForwardRows,
};

PointMap fmap_to_pointmap(const FunctionalMap& C, const SpectralBasis& basis_src, const SpectralBasis& basis_tgt,
                          Extraction direction = Extraction::PullbackRows);

/// Brute-force nearest database row for every query row; ties go to the
/// smallest index.
std::vector<int> nearest_rows(const Eigen::MatrixXd& database, const Eigen::MatrixXd& queries);

} // namespace cfm
