#include <cfm/error.hpp>
#include <cfm/optim.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <utility>

namespace cfm {

namespace {

// Π blocks are cached between the forward and backward sweeps below this size.
constexpr Eigen::Index kCacheEntries = Eigen::Index{1} << 22;

Eigen::MatrixXd weighted_left_inverse(const Eigen::MatrixXd& phi_rows, const Eigen::VectorXd& mass_rows)
{
    const Eigen::MatrixXd weighted = phi_rows.transpose() * mass_rows.asDiagonal();
    const Eigen::MatrixXd gram = weighted * phi_rows;
    return gram.ldlt().solve(weighted);
}

void check_finite(const Eigen::MatrixXd& m, const char* term)
{
    if (!m.allFinite()) fail(Errc::non_finite, std::string("gradient of the ") + term + " term is not finite");
}

/// Spatial branch: δ between latent-frame embeddings, row softmax Π, and
/// C₂ = L_tgt Π Φ_src, plus its vector-Jacobian product.
class SpatialBranch
{
public:
    SpatialBranch(const ShapeData& src, const ShapeData& tgt, const Eigen::MatrixXd& A_src,
                  const Eigen::MatrixXd& A_tgt, double alpha, const TrainConfig& config)
        : m_src(src)
        , m_tgt(tgt)
        , m_A_src(A_src)
        , m_alpha(alpha)
        , m_block(config.block_rows)
    {
        m_lift_src = src.sample_phi * A_src;
        m_lift_tgt = tgt.sample_phi * A_tgt;
        const Eigen::Index d = A_src.cols();
        if (config.svd_m > 0 && config.svd_m < d) {
            m_svd = right_singular_basis(A_src);
            m_rank = config.svd_m;
            const Eigen::MatrixXd V = m_svd.V.leftCols(m_rank);
            m_emb_src = m_lift_src * V;
            m_emb_tgt = m_lift_tgt * V;
        } else {
            m_emb_src = m_lift_src;
            m_emb_tgt = m_lift_tgt;
        }
        m_stream = std::make_unique<SoftMapStream>(m_emb_src, m_emb_tgt, alpha);

        const Eigen::Index rows = m_stream->rows();
        m_cached = rows * m_stream->cols() <= kCacheEntries;
        m_C = Eigen::MatrixXd::Zero(tgt.sample_left_inverse.rows(), src.sample_phi.cols());
        RowMatrix delta, pi;
        for (Eigen::Index q0 = 0; q0 < rows; q0 += m_block) {
            const Eigen::Index q1 = std::min(rows, q0 + m_block);
            weights(q0, q1, delta, pi);
            const Eigen::MatrixXd transported = pi * src.sample_phi;
            m_C.noalias() += tgt.sample_left_inverse.middleCols(q0, q1 - q0) * transported;
            if (m_cached) {
                m_delta_cache.push_back(delta);
                m_pi_cache.push_back(pi);
            }
        }
    }

    const Eigen::MatrixXd& map() const { return m_C; }

    void backward(const Eigen::MatrixXd& grad_C, Eigen::MatrixXd& grad_A_src, Eigen::MatrixXd& grad_A_tgt) const
    {
        const RowMatrix& emb_src = m_emb_src;
        const RowMatrix& emb_tgt = m_emb_tgt;
        const Eigen::MatrixXd pulled = m_tgt.sample_left_inverse.transpose() * grad_C; // s_tgt × k
        const Eigen::MatrixXd phi_src_t = m_src.sample_phi.transpose();

        Eigen::MatrixXd grad_emb_src = Eigen::MatrixXd::Zero(emb_src.rows(), emb_src.cols());
        Eigen::MatrixXd grad_emb_tgt = Eigen::MatrixXd::Zero(emb_tgt.rows(), emb_tgt.cols());
        RowMatrix delta_buf, pi_buf;
        const Eigen::Index rows = m_stream->rows();
        std::size_t block_index = 0;
        for (Eigen::Index q0 = 0; q0 < rows; q0 += m_block, ++block_index) {
            const Eigen::Index q1 = std::min(rows, q0 + m_block);
            const Eigen::Index b = q1 - q0;
            if (!m_cached) weights(q0, q1, delta_buf, pi_buf);
            const RowMatrix& delta = m_cached ? m_delta_cache[block_index] : delta_buf;
            const RowMatrix& pi = m_cached ? m_pi_cache[block_index] : pi_buf;

            // Softmax adjoint, then δ̄ = −α z̄, then divide by δ for the norm adjoint.
            RowMatrix scale = pulled.middleRows(q0, b) * phi_src_t;
            const Eigen::VectorXd inner = pi.cwiseProduct(scale).rowwise().sum();
            scale = (pi.array() * (scale.colwise() - inner).array()).matrix();
            scale *= -m_alpha;
            scale = (delta.array() > 0.0).select(scale.array() / delta.array(), 0.0).matrix();

            const Eigen::VectorXd col_sum = scale.colwise().sum().transpose();
            const Eigen::VectorXd row_sum = scale.rowwise().sum();
            grad_emb_src += col_sum.asDiagonal() * emb_src;
            grad_emb_src.noalias() -= scale.transpose() * emb_tgt.middleRows(q0, b);
            grad_emb_tgt.middleRows(q0, b) = row_sum.asDiagonal() * emb_tgt.middleRows(q0, b);
            grad_emb_tgt.middleRows(q0, b).noalias() -= scale * emb_src;
        }

        if (m_rank == 0) {
            grad_A_src.noalias() += m_src.sample_phi.transpose() * grad_emb_src;
            grad_A_tgt.noalias() += m_tgt.sample_phi.transpose() * grad_emb_tgt;
            return;
        }

        const Eigen::MatrixXd V = m_svd.V.leftCols(m_rank);
        grad_A_src.noalias() += m_src.sample_phi.transpose() * (grad_emb_src * V.transpose());
        grad_A_tgt.noalias() += m_tgt.sample_phi.transpose() * (grad_emb_tgt * V.transpose());

        // V̂ spans the top-m eigenspace of S = AᵀA; the loss depends on V̂ only
        // through that subspace, so only cross terms (top, rest) contribute.
        const Eigen::MatrixXd grad_V = m_lift_src.transpose() * grad_emb_src + m_lift_tgt.transpose() * grad_emb_tgt;
        const Eigen::Index d = m_svd.V.cols();
        const Eigen::MatrixXd rest = m_svd.V.rightCols(d - m_rank);
        Eigen::MatrixXd coupling = rest.transpose() * grad_V; // (d − m) × m
        const auto& mu = m_svd.squared_values;
        const double floor = 1e-12 * std::max(mu[0], 1e-300);
        for (Eigen::Index a = 0; a < m_rank; ++a) {
            for (Eigen::Index r = 0; r < d - m_rank; ++r) {
                const double gap = mu[a] - mu[m_rank + r];
                coupling(r, a) = gap > floor ? coupling(r, a) / gap : 0.0;
            }
        }
        const Eigen::MatrixXd grad_S = rest * coupling * V.transpose();
        grad_A_src.noalias() += m_A_src * (grad_S + grad_S.transpose());
    }

private:
    void weights(Eigen::Index q0, Eigen::Index q1, RowMatrix& delta, RowMatrix& pi) const
    {
        m_stream->residual_block(q0, q1, delta);
        pi = delta;
        softmax_rows(pi, m_alpha);
    }

    const ShapeData& m_src;
    const ShapeData& m_tgt;
    Eigen::MatrixXd m_A_src;
    double m_alpha;
    Eigen::Index m_block;
    Eigen::MatrixXd m_lift_src;
    Eigen::MatrixXd m_lift_tgt;
    RowMatrix m_emb_src;
    RowMatrix m_emb_tgt;
    RightSingularBasis m_svd;
    Eigen::Index m_rank = 0;
    std::unique_ptr<SoftMapStream> m_stream;
    bool m_cached = false;
    std::vector<RowMatrix> m_delta_cache;
    std::vector<RowMatrix> m_pi_cache;
    Eigen::MatrixXd m_C;
};

struct ForwardState
{
    PairOutput out;
    std::optional<FmregLayer> spectral;         // i → j
    std::optional<FmregLayer> spectral_reverse; // j → i, for the bijectivity term
    std::optional<SpatialBranch> spatial;
    std::optional<SpatialBranch> spatial_reverse;
    Eigen::MatrixXd reverse_map; // primary map j → i when bijectivity is active
};

Eigen::ArrayXXd commutativity_weights(const Eigen::VectorXd& L_src, const Eigen::VectorXd& L_tgt)
{
    const Eigen::Index k = L_src.size();
    return (L_src.transpose().replicate(k, 1).array() - L_tgt.replicate(1, k).array()).square();
}

void check_pair(const FeatureModel& model, std::span<const ShapeData> shapes, int i, int j,
                const TrainConfig& config)
{
    const int count = static_cast<int>(shapes.size());
    require(i >= 0 && i < count && j >= 0 && j < count, Errc::index_out_of_range, "pair index outside collection");
    require(shapes[i].basis.k() == shapes[j].basis.k(), Errc::dimension_mismatch, "bases differ in k");
    require(config.k == shapes[i].basis.k(), Errc::dimension_mismatch,
            "configured k=" + std::to_string(config.k) + " but basis has k=" + std::to_string(shapes[i].basis.k()));
    require(model.d() == config.d, Errc::dimension_mismatch,
            "configured d=" + std::to_string(config.d) + " but model has d=" + std::to_string(model.d()));
    if (model.mode == FeatureMode::DirectCoefficients) {
        require(static_cast<int>(model.params.coeffs.size()) == count, Errc::dimension_mismatch,
                "direct model holds a different number of shapes than the collection");
    }
}

ForwardState run_forward(const FeatureModel& model, std::span<const ShapeData> shapes, int i, int j, double alpha,
                         const TrainConfig& config)
{
    check_pair(model, shapes, i, j, config);
    const ShapeData& si = shapes[i];
    const ShapeData& sj = shapes[j];
    const bool reverse = config.weights.bij > 0.0;

    ForwardState st;
    st.out.A_i = features(model, si, i);
    st.out.A_j = features(model, sj, j);
    const Eigen::MatrixXd& Ai = st.out.A_i.values;
    const Eigen::MatrixXd& Aj = st.out.A_j.values;
    st.out.condition = row_rank_condition(Ai);

    if (config.mode != BranchMode::SpatialOnly) {
        st.spectral.emplace(Ai, Aj, si.basis.lambda, sj.basis.lambda, config.lam);
        st.out.C1 = FunctionalMap{st.spectral->map(), si.id, sj.id};
        if (reverse) {
            st.spectral_reverse.emplace(Aj, Ai, sj.basis.lambda, si.basis.lambda, config.lam);
            st.reverse_map = st.spectral_reverse->map();
        }
    }
    if (config.mode != BranchMode::SpectralOnly) {
        require(alpha > 0.0, Errc::invalid_argument, "alpha must be positive");
        st.spatial.emplace(si, sj, Ai, Aj, alpha, config);
        st.out.C2 = FunctionalMap{st.spatial->map(), si.id, sj.id};
        if (reverse && config.mode == BranchMode::SpatialOnly) {
            st.spatial_reverse.emplace(sj, si, Aj, Ai, alpha, config);
            st.reverse_map = st.spatial_reverse->map();
        }
    }

    const Eigen::MatrixXd& P = st.out.primary().values;
    const Eigen::Index k = P.rows();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k);
    LossTerms& t = st.out.terms;
    t.orth = (P.transpose() * P - I).squaredNorm();
    t.desc = (P * Ai - Aj).squaredNorm();
    t.lap = (P.array().square() * commutativity_weights(si.basis.lambda, sj.basis.lambda)).sum();
    if (config.mode == BranchMode::TwoBranch) t.consist = (st.out.C1->values - st.out.C2->values).squaredNorm();
    if (reverse) t.bij = (st.reverse_map * P - I).squaredNorm();
    return st;
}

Parameters to_parameters(const FeatureModel& model, std::span<const ShapeData> shapes, int i, int j,
                         const Eigen::MatrixXd& grad_Ai, const Eigen::MatrixXd& grad_Aj)
{
    Parameters grad = model.params.zeros_like();
    if (model.mode == FeatureMode::SharedLinear) {
        grad.theta.noalias() += shapes[i].projected.transpose() * grad_Ai;
        grad.theta.noalias() += shapes[j].projected.transpose() * grad_Aj;
    } else {
        grad.coeffs[static_cast<std::size_t>(i)] += grad_Ai;
        grad.coeffs[static_cast<std::size_t>(j)] += grad_Aj;
    }
    return grad;
}

} // namespace

Eigen::Index Parameters::size() const
{
    Eigen::Index total = theta.size();
    for (const auto& c : coeffs) total += c.size();
    return total;
}

Eigen::VectorXd Parameters::flatten() const
{
    Eigen::VectorXd flat(size());
    Eigen::Index offset = 0;
    auto put = [&](const Eigen::MatrixXd& m) {
        flat.segment(offset, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
        offset += m.size();
    };
    put(theta);
    for (const auto& c : coeffs) put(c);
    return flat;
}

void Parameters::assign(const Eigen::VectorXd& flat)
{
    require(flat.size() == size(), Errc::dimension_mismatch, "parameter vector has the wrong length");
    Eigen::Index offset = 0;
    auto take = [&](Eigen::MatrixXd& m) {
        Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(offset, m.size());
        offset += m.size();
    };
    take(theta);
    for (auto& c : coeffs) take(c);
}

Parameters Parameters::zeros_like() const
{
    Parameters out;
    out.theta = Eigen::MatrixXd::Zero(theta.rows(), theta.cols());
    for (const auto& c : coeffs) out.coeffs.push_back(Eigen::MatrixXd::Zero(c.rows(), c.cols()));
    return out;
}

FeatureModel FeatureModel::shared_linear(int d_in, int d, int k, std::uint64_t seed, double noise)
{
    require(d_in > 0 && d > 0, Errc::invalid_argument, "feature dimensions must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    FeatureModel model;
    model.mode = FeatureMode::SharedLinear;
    model.k = k;
    model.seed = seed;
    model.params.theta = Eigen::MatrixXd::Identity(d_in, d);
    const double scale = noise / std::sqrt(static_cast<double>(d_in));
    for (Eigen::Index c = 0; c < d; ++c)
        for (Eigen::Index r = 0; r < d_in; ++r) model.params.theta(r, c) += scale * normal(rng);
    return model;
}

FeatureModel FeatureModel::direct(int shapes, int k, int d, std::uint64_t seed)
{
    require(shapes > 0 && k > 0 && d > 0, Errc::invalid_argument, "direct model dimensions must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    FeatureModel model;
    model.mode = FeatureMode::DirectCoefficients;
    model.k = k;
    model.seed = seed;
    for (int s = 0; s < shapes; ++s) {
        Eigen::MatrixXd block(k, d);
        for (Eigen::Index c = 0; c < d; ++c)
            for (Eigen::Index r = 0; r < k; ++r) block(r, c) = normal(rng);
        model.params.coeffs.push_back(std::move(block));
    }
    return model;
}

Eigen::Index FeatureModel::d() const
{
    if (mode == FeatureMode::SharedLinear) return params.theta.cols();
    return params.coeffs.empty() ? 0 : params.coeffs.front().cols();
}

ShapeData prepare_shape(std::string id, TriMesh mesh, SpectralBasis basis, Eigen::MatrixXd descriptors)
{
    require(descriptors.rows() == basis.n() && basis.n() == mesh.num_vertices(), Errc::dimension_mismatch,
            "mesh, basis and descriptors disagree on the vertex count");
    ShapeData shape;
    shape.id = std::move(id);
    shape.mesh = std::move(mesh);
    shape.basis = std::move(basis);
    shape.descriptors = std::move(descriptors);
    shape.projected = project(shape.basis, shape.descriptors).values;
    shape.samples.resize(static_cast<std::size_t>(shape.basis.n()));
    for (int v = 0; v < shape.basis.n(); ++v) shape.samples[static_cast<std::size_t>(v)] = v;
    shape.sample_phi = shape.basis.phi;
    shape.sample_left_inverse = shape.basis.phi.transpose() * shape.basis.mass.asDiagonal();
    return shape;
}

ShapeData prepare_shape(const TriMesh& mesh, int k, int d_in, const EigenOptions& options)
{
    SpectralBasis basis = compute_basis(mesh, k, options);
    DescriptorSet desc = wks(basis, d_in);
    return prepare_shape(mesh.name(), mesh, std::move(basis), std::move(desc.values));
}

void restrict_spatial_branch(ShapeData& shape, const SampleSet& samples)
{
    const auto count = static_cast<Eigen::Index>(samples.indices.size());
    require(count >= shape.basis.k(), Errc::invalid_argument,
            "need at least k samples for a left inverse of the sampled basis");
    Eigen::MatrixXd phi(count, shape.basis.k());
    Eigen::VectorXd mass(count);
    for (Eigen::Index r = 0; r < count; ++r) {
        const int v = samples.indices[static_cast<std::size_t>(r)];
        require(v >= 0 && v < shape.basis.n(), Errc::index_out_of_range, "sample index outside the mesh");
        phi.row(r) = shape.basis.phi.row(v);
        mass[r] = shape.basis.mass[v];
    }
    shape.samples = samples.indices;
    shape.sample_left_inverse = weighted_left_inverse(phi, mass);
    shape.sample_phi = std::move(phi);
}

LossWeights default_weights(BranchMode mode, double lam)
{
    if (mode == BranchMode::SpatialOnly) return {1.0, 0.0, 1.0, lam, 0.0};
    return {1.0, 1.0, 0.0, 0.0, 0.0};
}

CoeffMatrix features(const FeatureModel& model, const ShapeData& shape, int index)
{
    if (model.mode == FeatureMode::SharedLinear) {
        require(model.params.theta.rows() == shape.projected.cols(), Errc::dimension_mismatch,
                "model expects " + std::to_string(model.params.theta.rows()) + " input descriptors, shape has " +
                    std::to_string(shape.projected.cols()));
        return {shape.projected * model.params.theta, shape.id};
    }
    require(index >= 0 && index < static_cast<int>(model.params.coeffs.size()), Errc::index_out_of_range,
            "no coefficient block for shape " + std::to_string(index));
    const auto& block = model.params.coeffs[static_cast<std::size_t>(index)];
    require(block.rows() == shape.basis.k(), Errc::dimension_mismatch, "coefficient block has the wrong k");
    return {block, shape.id};
}

PairOutput forward_pair(const FeatureModel& model, std::span<const ShapeData> shapes, int i, int j, double alpha,
                        const TrainConfig& config)
{
    return run_forward(model, shapes, i, j, alpha, config).out;
}

double total_loss(const PairOutput& out, const TrainConfig& config)
{
    const LossWeights& w = config.weights;
    const LossTerms& t = out.terms;
    return w.orth * t.orth + w.consist * t.consist + w.desc * t.desc + w.lap * t.lap + w.bij * t.bij;
}

PairGradient backward_pair(const FeatureModel& model, std::span<const ShapeData> shapes, int i, int j, double alpha,
                           const TrainConfig& config)
{
    ForwardState st = run_forward(model, shapes, i, j, alpha, config);
    const LossWeights& w = config.weights;
    const ShapeData& si = shapes[i];
    const ShapeData& sj = shapes[j];
    const Eigen::MatrixXd& Ai = st.out.A_i.values;
    const Eigen::MatrixXd& Aj = st.out.A_j.values;
    const bool spatial_primary = config.mode == BranchMode::SpatialOnly;
    const Eigen::MatrixXd& P = st.out.primary().values;
    const Eigen::Index k = P.rows();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k);

    Eigen::MatrixXd grad_P = Eigen::MatrixXd::Zero(k, k);
    Eigen::MatrixXd grad_reverse = Eigen::MatrixXd::Zero(k, k);
    Eigen::MatrixXd grad_C1 = Eigen::MatrixXd::Zero(k, k);
    Eigen::MatrixXd grad_C2 = Eigen::MatrixXd::Zero(k, k);
    Eigen::MatrixXd grad_Ai = Eigen::MatrixXd::Zero(Ai.rows(), Ai.cols());
    Eigen::MatrixXd grad_Aj = Eigen::MatrixXd::Zero(Aj.rows(), Aj.cols());

    if (w.orth != 0.0) {
        const Eigen::MatrixXd g = 4.0 * w.orth * P * (P.transpose() * P - I);
        check_finite(g, "orthogonality");
        grad_P += g;
    }
    if (w.desc != 0.0) {
        const Eigen::MatrixXd residual = P * Ai - Aj;
        const Eigen::MatrixXd g = 2.0 * w.desc * residual * Ai.transpose();
        check_finite(g, "descriptor");
        grad_P += g;
        grad_Ai += 2.0 * w.desc * P.transpose() * residual;
        grad_Aj -= 2.0 * w.desc * residual;
    }
    if (w.lap != 0.0) {
        const Eigen::MatrixXd g =
            (2.0 * w.lap * P.array() * commutativity_weights(si.basis.lambda, sj.basis.lambda)).matrix();
        check_finite(g, "laplacian commutativity");
        grad_P += g;
    }
    if (w.bij != 0.0) {
        const Eigen::MatrixXd E = st.reverse_map * P - I;
        const Eigen::MatrixXd g = 2.0 * w.bij * st.reverse_map.transpose() * E;
        check_finite(g, "bijectivity");
        grad_P += g;
        grad_reverse = 2.0 * w.bij * E * P.transpose();
    }
    (spatial_primary ? grad_C2 : grad_C1) += grad_P;

    if (config.mode == BranchMode::TwoBranch && w.consist != 0.0) {
        const Eigen::MatrixXd g = 2.0 * w.consist * (st.out.C1->values - st.out.C2->values);
        check_finite(g, "consistency");
        grad_C1 += g;
        grad_C2 -= g;
    }

    if (st.spectral) st.spectral->backward(grad_C1, grad_Ai, grad_Aj);
    if (st.spectral_reverse) st.spectral_reverse->backward(grad_reverse, grad_Aj, grad_Ai);
    if (st.spatial) st.spatial->backward(grad_C2, grad_Ai, grad_Aj);
    if (st.spatial_reverse) st.spatial_reverse->backward(grad_reverse, grad_Aj, grad_Ai);

    PairGradient out;
    out.gradient = to_parameters(model, shapes, i, j, grad_Ai, grad_Aj);
    require(out.gradient.flatten().allFinite(), Errc::non_finite, "propagated parameter gradient is not finite");
    out.loss = total_loss(st.out, config);
    out.output = std::move(st.out);
    return out;
}

double finite_difference_check(const FeatureModel& model, std::span<const ShapeData> shapes, int i, int j,
                               double alpha, const TrainConfig& config, double epsilon)
{
    const Eigen::VectorXd analytic = backward_pair(model, shapes, i, j, alpha, config).gradient.flatten();
    const Eigen::VectorXd base = model.params.flatten();
    FeatureModel probe = model;
    double worst = 0.0;
    for (Eigen::Index p = 0; p < base.size(); ++p) {
        Eigen::VectorXd shifted = base;
        shifted[p] = base[p] + epsilon;
        probe.params.assign(shifted);
        const double up = total_loss(forward_pair(probe, shapes, i, j, alpha, config), config);
        shifted[p] = base[p] - epsilon;
        probe.params.assign(shifted);
        const double down = total_loss(forward_pair(probe, shapes, i, j, alpha, config), config);
        const double numeric = (up - down) / (2.0 * epsilon);
        const double denom = std::max({std::abs(numeric), std::abs(analytic[p]), 1e-12});
        worst = std::max(worst, std::abs(numeric - analytic[p]) / denom);
    }
    return worst;
}

FeatureModel initial_model(std::span<const ShapeData> shapes, FeatureMode mode, const TrainConfig& config)
{
    require(!shapes.empty(), Errc::invalid_argument, "empty collection");
    if (mode == FeatureMode::SharedLinear) {
        return FeatureModel::shared_linear(static_cast<int>(shapes.front().descriptors.cols()), config.d, config.k,
                                           config.seed);
    }
    return FeatureModel::direct(static_cast<int>(shapes.size()), config.k, config.d, config.seed);
}

TrainResult train(std::span<const ShapeData> shapes, const TrainConfig& config, std::optional<FeatureModel> init,
                  FeatureMode mode)
{
    require(shapes.size() >= 2, Errc::invalid_argument, "training needs at least two shapes");
    require(config.iterations > 0, Errc::invalid_argument, "iterations must be positive");
    require(config.learning_rate > 0.0, Errc::invalid_argument, "learning rate must be positive");
    const LossWeights& w = config.weights;
    require(w.orth >= 0 && w.consist >= 0 && w.desc >= 0 && w.lap >= 0 && w.bij >= 0, Errc::invalid_argument,
            "loss weights must be nonnegative");
    require(config.alpha.alpha0 > 0.0 && config.alpha.step >= 0.0, Errc::invalid_argument,
            "alpha schedule needs alpha0 > 0 and step >= 0");

    TrainResult result;
    result.model = init ? std::move(*init) : initial_model(shapes, mode, config);

    std::vector<std::pair<int, int>> pairs;
    const int count = static_cast<int>(shapes.size());
    for (int i = 0; i < count; ++i)
        for (int j = 0; j < count; ++j)
            if (i != j) pairs.emplace_back(i, j);
    const int epoch_len = config.alpha.epoch_len > 0 ? config.alpha.epoch_len : static_cast<int>(pairs.size());

    std::mt19937_64 rng(config.seed);
    Eigen::VectorXd theta = result.model.params.flatten();
    Eigen::VectorXd first = Eigen::VectorXd::Zero(theta.size());
    Eigen::VectorXd second = Eigen::VectorXd::Zero(theta.size());
    std::size_t cursor = pairs.size();

    result.history.reserve(static_cast<std::size_t>(config.iterations));
    for (int it = 0; it < config.iterations; ++it) {
        if (cursor == pairs.size()) {
            for (std::size_t s = pairs.size() - 1; s > 0; --s) std::swap(pairs[s], pairs[rng() % (s + 1)]);
            cursor = 0;
        }
        const auto [i, j] = pairs[cursor++];
        const int epoch = it / epoch_len;
        const double alpha = alpha_at(config.alpha, epoch);

        PairGradient step = backward_pair(result.model, shapes, i, j, alpha, config);
        result.history.push_back({it, epoch, alpha, i, j, step.output.terms, step.loss});
        if (!std::isfinite(step.loss) || step.loss > config.divergence_threshold) {
            result.diverged = true;
            break;
        }

        const Eigen::VectorXd grad = step.gradient.flatten();
        if (config.optimizer == OptimizerKind::GradientDescent) {
            theta -= config.learning_rate * grad;
        } else {
            first = config.beta1 * first + (1.0 - config.beta1) * grad;
            second = config.beta2 * second + (1.0 - config.beta2) * grad.cwiseAbs2();
            const double c1 = 1.0 - std::pow(config.beta1, it + 1);
            const double c2 = 1.0 - std::pow(config.beta2, it + 1);
            theta.array() -= config.learning_rate * (first.array() / c1) /
                             ((second.array() / c2).sqrt() + config.adam_epsilon);
        }
        result.model.params.assign(theta);
    }
    return result;
}

double final_loss(const std::vector<HistoryRow>& history, std::size_t window)
{
    require(!history.empty(), Errc::invalid_argument, "empty history");
    const std::size_t n = std::min(window, history.size());
    double total = 0.0;
    for (std::size_t r = history.size() - n; r < history.size(); ++r) total += history[r].total;
    return total / static_cast<double>(n);
}

FunctionalMap predict_fmap(const FeatureModel& model, std::span<const ShapeData> shapes, int i, int j, double lam)
{
    const CoeffMatrix Ai = features(model, shapes[i], i);
    const CoeffMatrix Aj = features(model, shapes[j], j);
    return solve_fmreg(Ai, Aj, shapes[i].basis.lambda, shapes[j].basis.lambda, lam).map;
}

FunctionalMap predict_spatial_fmap(const FeatureModel& model, std::span<const ShapeData> shapes, int i, int j,
                                   double alpha, const TrainConfig& config)
{
    const CoeffMatrix Ai = features(model, shapes[i], i);
    const CoeffMatrix Aj = features(model, shapes[j], j);
    const SpatialBranch branch(shapes[i], shapes[j], Ai.values, Aj.values, alpha, config);
    return {branch.map(), shapes[i].id, shapes[j].id};
}

} // namespace cfm
