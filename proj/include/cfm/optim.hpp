#pragma once

#include <cfm/descriptors.hpp>
#include <cfm/fmap.hpp>
#include <cfm/mesh.hpp>
#include <cfm/softmap.hpp>
#include <cfm/spectral.hpp>
#include <cfm/types.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cfm {

enum class FeatureMode { SharedLinear, DirectCoefficients };
enum class BranchMode { TwoBranch, SpectralOnly, SpatialOnly };
enum class OptimizerKind { Adam, GradientDescent };

/// Trainable parameters. SharedLinear uses `theta` (d_in × d), applied to
/// every shape; DirectCoefficients keeps one k × d block per shape.
struct Parameters
{
    Eigen::MatrixXd theta;
    std::vector<Eigen::MatrixXd> coeffs;

    Eigen::Index size() const;
    Eigen::VectorXd flatten() const;
    void assign(const Eigen::VectorXd& flat);
    Parameters zeros_like() const;
};

struct FeatureModel
{
    FeatureMode mode = FeatureMode::SharedLinear;
    Parameters params;
    int k = 0;
    std::uint64_t seed = 0;

    /// Identity plus seeded Gaussian noise of scale noise/√d_in, so the
    /// untrained model passes the input descriptors through.
    static FeatureModel shared_linear(int d_in, int d, int k, std::uint64_t seed, double noise = 0.01);
    /// Seeded standard-normal coefficient blocks.
    static FeatureModel direct(int shapes, int k, int d, std::uint64_t seed);

    Eigen::Index d() const;
};

/// Everything precomputed for one shape.
struct ShapeData
{
    std::string id;
    TriMesh mesh;
    SpectralBasis basis;
    Eigen::MatrixXd descriptors; // n × d_in
    Eigen::MatrixXd projected;   // Φᵀ M descriptors, k × d_in

    /// Vertices used by the spatial branch; all vertices unless subsampled.
    std::vector<int> samples;
    Eigen::MatrixXd sample_phi;          // rows of Φ at `samples`
    Eigen::MatrixXd sample_left_inverse; // k × |samples|, M-weighted left inverse of sample_phi
};

/// Computes basis and WKS descriptors for an (already normalized) mesh.
ShapeData prepare_shape(const TriMesh& mesh, int k, int d_in, const EigenOptions& options = {});
ShapeData prepare_shape(std::string id, TriMesh mesh, SpectralBasis basis, Eigen::MatrixXd descriptors);

/// Restricts the spatial branch to a vertex subset (e.g. farthest point samples).
void restrict_spatial_branch(ShapeData& shape, const SampleSet& samples);

struct LossWeights
{
    double orth = 1.0;
    double consist = 1.0;
    double desc = 0.0;
    double lap = 0.0;
    double bij = 0.0;
};

/// TwoBranch/SpectralOnly: orth + consist. SpatialOnly: orth + desc + lam·lap
/// on C₂, standing in for the removed regularized solve.
LossWeights default_weights(BranchMode mode, double lam);

struct TrainConfig
{
    int k = 50;
    int d = 128;
    double lam = 1e-3;
    AlphaSchedule alpha{1.0, 5.0, 0};
    double learning_rate = 2e-4;
    int iterations = 10000;
    LossWeights weights;
    BranchMode mode = BranchMode::TwoBranch;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    /// Feature truncation rank for the spatial residuals; 0 disables it.
    int svd_m = 0;
    Eigen::Index block_rows = kDefaultBlockRows;
    bool deterministic = false;
    std::uint64_t seed = 0;
    double divergence_threshold = 1e12;
};

struct LossTerms
{
    double orth = 0.0;
    double consist = 0.0;
    double desc = 0.0;
    double lap = 0.0;
    double bij = 0.0;
};

struct PairOutput
{
    CoeffMatrix A_i;
    CoeffMatrix A_j;
    std::optional<FunctionalMap> C1; // regularized solve (absent in SpatialOnly)
    std::optional<FunctionalMap> C2; // spatial branch (absent in SpectralOnly)
    LossTerms terms;
    double condition = 0.0; // cond(A_i A_iᵀ)

    /// The map scored by the structural losses: C1 unless SpatialOnly.
    const FunctionalMap& primary() const { return C1 ? *C1 : *C2; }
};

CoeffMatrix features(const FeatureModel& model, const ShapeData& shape, int index);

PairOutput forward_pair(const FeatureModel& model, std::span<const ShapeData> shapes, int i, int j, double alpha,
                        const TrainConfig& config);

double total_loss(const PairOutput& out, const TrainConfig& config);

struct PairGradient
{
    PairOutput output;
    double loss = 0.0;
    Parameters gradient;
};

/// Exact reverse-mode gradient of total_loss with respect to the model parameters.
PairGradient backward_pair(const FeatureModel& model, std::span<const ShapeData> shapes, int i, int j, double alpha,
                           const TrainConfig& config);

/// max over parameters of |g_fd − g| / max(|g_fd|, |g|, 1e-12), central differences.
double finite_difference_check(const FeatureModel& model, std::span<const ShapeData> shapes, int i, int j,
                               double alpha, const TrainConfig& config, double epsilon);

struct HistoryRow
{
    int iteration = 0;
    int epoch = 0;
    double alpha = 0.0;
    int source = 0;
    int target = 0;
    LossTerms terms;
    double total = 0.0;
};

struct TrainResult
{
    FeatureModel model;
    std::vector<HistoryRow> history;
    bool diverged = false;
};

FeatureModel initial_model(std::span<const ShapeData> shapes, FeatureMode mode, const TrainConfig& config);

/// One pair per step over all ordered pairs, reshuffled (seeded) every pass;
/// α advances at epoch boundaries.
TrainResult train(std::span<const ShapeData> shapes, const TrainConfig& config,
                  std::optional<FeatureModel> init = std::nullopt, FeatureMode mode = FeatureMode::SharedLinear);

/// Mean total loss over the last `window` history rows.
double final_loss(const std::vector<HistoryRow>& history, std::size_t window);

/// Regularized-solve map between two shapes under a trained model.
FunctionalMap predict_fmap(const FeatureModel& model, std::span<const ShapeData> shapes, int i, int j, double lam);
/// Spatial-branch map at sharpness alpha.
FunctionalMap predict_spatial_fmap(const FeatureModel& model, std::span<const ShapeData> shapes, int i, int j,
                                   double alpha, const TrainConfig& config);

} // namespace cfm
