// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <cfm/cli.hpp>
#include <cfm/consistency.hpp>
#include <cfm/descriptors.hpp>
#include <cfm/error.hpp>
#include <cfm/eval.hpp>
#include <cfm/fmap.hpp>
#include <cfm/io.hpp>
#include <cfm/mesh.hpp>
#include <cfm/optim.hpp>
#include <cfm/softmap.hpp>
#include <cfm/spectral.hpp>
#include <cfm/synth.hpp>

#include <Eigen/LU>
#include <Eigen/QR>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace cfm;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Collects named checks for one criterion and prints them on failure.
class Report
{
public:
    void check(bool ok, const std::string& what)
    {
        m_lines.push_back((ok ? "    ok   " : "    FAIL ") + what);
        m_ok = m_ok && ok;
    }
    void note(const std::string& what) { m_lines.push_back("    " + what); }
    bool ok() const { return m_ok; }
    const std::vector<std::string>& lines() const { return m_lines; }

private:
    std::vector<std::string> m_lines;
    bool m_ok = true;
};

std::string fmt(const char* format, double value)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, format, value);
    return buf;
}

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
    return m;
}

double fraction_equal(const std::vector<int>& a, const std::vector<int>& b)
{
    std::size_t same = 0;
    for (std::size_t p = 0; p < a.size(); ++p) same += a[p] == b[p];
    return static_cast<double>(same) / static_cast<double>(a.size());
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

int call_cli(std::vector<std::string> args, std::string* output = nullptr)
{
    std::ostringstream out, err;
    const int code = dispatch(args, out, err);
    if (output) *output = out.str();
    if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
    return code;
}

/// The default six-shape collection at 642 vertices, prepared once.
struct Collection
{
    std::vector<SynthShape> synth;
    std::vector<ShapeData> shapes;
};

const Collection& default_shapes()
{
    static const Collection c = [] {
        Collection out;
        out.synth = default_collection(3, 1);
        for (const auto& s : out.synth) out.shapes.push_back(prepare_shape(s.mesh, 50, 128));
        return out;
    }();
    return c;
}

int index_of(const Collection& c, const std::string& id)
{
    for (std::size_t s = 0; s < c.synth.size(); ++s)
        if (c.synth[s].mesh.name() == id) return static_cast<int>(s);
    fail(Errc::missing_data, "no shape " + id);
}

GroundTruth truth(const Collection& c, int i, int j)
{
    return compose_ground_truth(c.synth[static_cast<std::size_t>(i)].from_base,
                                c.synth[static_cast<std::size_t>(j)].from_base);
}

// 1. Eigen correctness on the unit icosphere.
void eigen_correctness(Report& r)
{
    const auto start = Clock::now();
    const TriMesh sphere = make_icosphere(4);
    const SpectralBasis basis = compute_basis(sphere, 10);
    const double elapsed = seconds_since(start);
    r.check(sphere.num_vertices() == 2562, "2562 vertices");
    const double analytic[] = {2, 2, 2, 6, 6, 6, 6, 6, 12};
    double worst = 0.0;
    for (int j = 1; j < 10; ++j) worst = std::max(worst, std::abs(basis.lambda[j] - analytic[j - 1]) / analytic[j - 1]);
    r.check(worst <= 0.05, fmt("max relative eigenvalue error %.4f <= 0.05", worst));
    const double ortho = (basis.phi.transpose() * basis.mass.asDiagonal() * basis.phi -
                          Eigen::MatrixXd::Identity(10, 10))
                             .norm();
    r.check(ortho <= 1e-8, fmt("||Phi^T M Phi - I||_F = %.2e <= 1e-8", ortho));
    r.check(elapsed < 10.0, fmt("runtime %.2f s < 10 s", elapsed));
}

// 2. Identity pair through the match command.
void identity_pair(Report& r)
{
    const fs::path dir = fs::temp_directory_path() / "cfm_acceptance_identity";
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (const auto& s : default_collection(3, 1)) {
        const std::string id = s.mesh.name();
        const fs::path mesh = dir / (id + ".obj"), spec = dir / (id + ".spec"), desc = dir / (id + ".fmat");
        write_obj(mesh, s.mesh);
        bool ok = call_cli({"eigen", mesh.string(), "-k", "50", "-o", spec.string()}) == 0 &&
                  call_cli({"wks", spec.string(), "-d", "128", "-o", desc.string()}) == 0;
        const fs::path fmap = dir / (id + ".fmap"), pmap = dir / (id + ".map");
        ok = ok && call_cli({"match", spec.string(), desc.string(), spec.string(), desc.string(), "-o", fmap.string(),
                             "--pointmap", pmap.string()}) == 0;
        std::string geo;
        ok = ok && call_cli({"eval-geo", pmap.string(), pmap.string(), mesh.string()}, &geo) == 0;
        if (!ok) {
            r.check(false, id + ": command failed");
            continue;
        }
        const double dev = (load_fmap(fmap).values - Eigen::MatrixXd::Identity(50, 50)).norm();
        // The extracted self-map must itself be the identity.
        const PointMap pm = load_pointmap(pmap);
        bool identity_map = true;
        for (int p = 0; p < pm.n_from(); ++p) identity_map = identity_map && pm.assignment[p] == p;
        std::string gt_geo;
        std::vector<int> iota(static_cast<std::size_t>(pm.n_from()));
        for (int p = 0; p < pm.n_from(); ++p) iota[p] = p;
        save_pointmap(dir / "gt.map", PointMap{iota, pm.n_to, id, id});
        call_cli({"eval-geo", pmap.string(), (dir / "gt.map").string(), mesh.string()}, &gt_geo);
        r.check(dev <= 1e-6 && identity_map && gt_geo == "mean_geo_err_x100: 0.000\n",
                id + fmt(": ||C - I||_F = %.2e, vertex map is identity, ", dev) +
                    gt_geo.substr(0, gt_geo.size() - 1));
    }
    fs::remove_all(dir);
}

// 3. Exact permutation pair: regularized solve and soft branch.
void permutation_pair(Report& r)
{
    const Collection& c = default_shapes();
    const int src = index_of(c, "bumps_a"), tgt = index_of(c, "bumps_a_perm");
    const ShapeData& a = c.shapes[static_cast<std::size_t>(src)];
    const ShapeData& b = c.shapes[static_cast<std::size_t>(tgt)];
    const GroundTruth gt = truth(c, src, tgt);

    const CoeffMatrix Aa{a.projected, a.id}, Ab{b.projected, b.id};
    const FmregResult solved = solve_fmreg(Aa, Ab, a.basis.lambda, b.basis.lambda, 1e-3);
    const PointMap pm = fmap_to_pointmap(solved.map, a.basis, b.basis, Extraction::ForwardRows);
    const double spectral_rate = fraction_equal(pm.assignment, gt.assignment);
    r.check(spectral_rate >= 0.99, fmt("regularized solve recovers %.4f of vertices (>= 0.99)", spectral_rate));

    // Soft branch: rows of Π index target vertices; the expected column is the source preimage.
    const SoftMap pi = soft_correspondence(aligned_embedding(a.basis, Aa), aligned_embedding(b.basis, Ab), 1e4);
    std::vector<int> expected(gt.assignment.size()), argmax(gt.assignment.size());
    for (std::size_t p = 0; p < gt.assignment.size(); ++p) expected[static_cast<std::size_t>(gt.assignment[p])] =
        static_cast<int>(p);
    for (Eigen::Index q = 0; q < pi.weights.rows(); ++q) {
        Eigen::Index best = 0;
        pi.weights.row(q).maxCoeff(&best);
        argmax[static_cast<std::size_t>(q)] = static_cast<int>(best);
    }
    const double soft_rate = fraction_equal(argmax, expected);
    r.check(soft_rate >= 0.99, fmt("soft map at alpha 1e4 recovers %.4f of rows (>= 0.99)", soft_rate));
}

// 4. Cycle consistency from descriptor preservation.
void descriptor_cycle(Report& r)
{
    const int k = 10, d = 20, n = 6;
    const TripletSample sample = sample_triplets(n, 1000, 4);
    {
        const Eigen::MatrixXd A0 = gaussian(k, d, 1);
        std::vector<CoeffMatrix> coeffs;
        for (int i = 0; i < n; ++i) {
            const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(k, k) + gaussian(k, k, 10 + i, 0.3 / std::sqrt(k));
            coeffs.push_back({Q * A0, std::to_string(i)});
        }
        const Eigen::VectorXd L = Eigen::VectorXd::LinSpaced(k, 0.0, 9.0);
        FunctionalMapSet maps;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) maps[{i, j}] = solve_fmreg(coeffs[i], coeffs[j], L, L, 0.0).map;
        const double fres = functional_cycle_residual_on_A(maps, coeffs, sample);
        const double sres = spectral_cycle_residual(maps, sample);
        r.check(fres < 1e-10, fmt("constructed: functional cycle residual %.2e < 1e-10", fres));
        r.check(sres < 1e-10, fmt("constructed: spectral cycle residual %.2e < 1e-10", sres));
    }

    // Trained: four shapes, per-shape coefficients, descriptor term only, exact least-squares maps.
    const Collection& c = default_shapes();
    std::vector<ShapeData> four;
    for (const char* id : {"sphere", "bumps_a", "bumps_b", "aniso_05"})
        four.push_back(prepare_shape(c.synth[static_cast<std::size_t>(index_of(c, id))].mesh, k, 16));
    TrainConfig config;
    config.k = k;
    config.d = d;
    config.lam = 0.0;
    config.mode = BranchMode::SpectralOnly;
    config.weights = {0.0, 0.0, 1.0, 0.0, 0.0};
    config.optimizer = OptimizerKind::Adam;
    config.learning_rate = 1e-2;
    config.iterations = 3000;
    config.seed = 3;
    const auto start = Clock::now();
    const TrainResult trained = train(four, config, std::nullopt, FeatureMode::DirectCoefficients);

    double max_desc = 0.0, max_cond = 0.0;
    FunctionalMapSet maps;
    std::vector<CoeffMatrix> coeffs;
    for (int i = 0; i < 4; ++i) {
        coeffs.push_back(features(trained.model, four[i], i));
        max_cond = std::max(max_cond, row_rank_condition(coeffs.back().values));
    }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (i == j) continue;
            maps[{i, j}] = predict_fmap(trained.model, four, i, j, 0.0);
            max_desc = std::max(max_desc, loss_descriptor(maps[{i, j}], coeffs[i], coeffs[j]));
        }
    const double fres = functional_cycle_residual_on_A(maps, coeffs, sample_triplets(4, 1000, 5));
    r.note(fmt("training: %.1f s, ", seconds_since(start)) + std::to_string(trained.history.size()) + " steps");
    if (!trained.history.empty())
        r.note(fmt("first-step descriptor residual %.2e", trained.history.front().terms.desc));
    r.check(!trained.diverged, "training did not diverge");
    r.check(max_desc < 1e-6, fmt("trained: max-pair descriptor residual %.2e < 1e-6", max_desc));
    r.check(max_cond < kConditionWarning, fmt("trained: max cond(A A^T) %.2e below the monitor threshold", max_cond));
    r.check(fres < 1e-3, fmt("trained: functional cycle residual %.2e < 1e-3", fres));
}

// 5. Analytic gradients against finite differences.
void gradient_exactness(Report& r)
{
    const auto start = Clock::now();
    const auto synth = default_collection(2, 1);
    const int k = 10, d = 12, d_in = 12;
    std::vector<ShapeData> shapes;
    for (std::size_t s : {std::size_t{0}, std::size_t{4}, std::size_t{2}})
        shapes.push_back(prepare_shape(synth[s].mesh, k, d_in));
    r.note("n = " + std::to_string(shapes[0].basis.n()) + ", k = 10, d = 12");
    for (BranchMode mode : {BranchMode::TwoBranch, BranchMode::SpectralOnly}) {
        TrainConfig config;
        config.k = k;
        config.d = d;
        config.lam = 1e-2;
        config.mode = mode;
        config.weights = default_weights(mode, config.lam);
        const char* name = mode == BranchMode::TwoBranch ? "two-branch" : "spectral-only";
        const double shared =
            finite_difference_check(FeatureModel::shared_linear(d_in, d, k, 5, 0.5), shapes, 0, 1, 3.0, config, 1e-5);
        const double direct =
            finite_difference_check(FeatureModel::direct(3, k, d, 6), shapes, 1, 2, 3.0, config, 1e-5);
        r.check(shared < 1e-4, std::string(name) + fmt(" shared-linear: max relative error %.2e < 1e-4", shared));
        r.check(direct < 1e-4, std::string(name) + fmt(" direct coefficients: max relative error %.2e < 1e-4", direct));
    }
    const double elapsed = seconds_since(start);
    r.check(elapsed < 60.0, fmt("runtime %.2f s < 60 s", elapsed));
}

struct CycleMetrics
{
    double spatial = 0.0;
    double spectral = 0.0;
};

CycleMetrics cycle_metrics(const FeatureModel& model, std::span<const ShapeData> shapes, double lam)
{
    const int n = static_cast<int>(shapes.size());
    FunctionalMapSet fmaps;
    PointMapSet pmaps;
    std::vector<TriMesh> meshes;
    for (const auto& s : shapes) meshes.push_back(s.mesh.renamed(s.id));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            fmaps[{i, j}] = predict_fmap(model, shapes, i, j, lam);
            pmaps[{i, j}] = fmap_to_pointmap(fmaps[{i, j}], shapes[i].basis, shapes[j].basis, Extraction::ForwardRows);
        }
    const TripletSample sample = sample_triplets(n, 1000, 11);
    return {spatial_cycle_deviation(pmaps, meshes, sample), spectral_cycle_residual(fmaps, sample)};
}

TrainConfig trend_config(BranchMode mode)
{
    TrainConfig config;
    config.iterations = 3000;
    config.mode = mode;
    config.weights = default_weights(mode, config.lam);
    config.seed = 7;
    return config;
}

/// The two-branch curriculum run, shared by criteria 6 and 7.
const TrainResult& two_branch_run()
{
    static const TrainResult run = train(default_shapes().shapes, trend_config(BranchMode::TwoBranch));
    return run;
}

// 6. Spatial branch improves cycle consistency over the spectral branch alone.
void cycle_trend(Report& r)
{
    const auto start = Clock::now();
    const auto& shapes = default_shapes().shapes;
    const TrainResult& two_branch = two_branch_run();
    const TrainResult spectral = train(shapes, trend_config(BranchMode::SpectralOnly));
    r.check(!two_branch.diverged && !spectral.diverged, "both runs finished 3000 iterations");
    const CycleMetrics two = cycle_metrics(two_branch.model, shapes, 1e-3);
    const CycleMetrics one = cycle_metrics(spectral.model, shapes, 1e-3);
    r.note(fmt("two-branch: spatial deviation %.6f", two.spatial) + fmt(", spectral residual %.6f", two.spectral));
    r.note(fmt("spectral-only: spatial deviation %.6f", one.spatial) + fmt(", spectral residual %.6f", one.spectral));
    r.check(two.spatial <= one.spatial, "spatial deviation(two-branch) <= spatial deviation(spectral-only)");
    r.check(two.spectral <= 2.0 * one.spectral, "spectral residual(two-branch) <= 2 x spectral residual(spectral-only)");
    const double elapsed = seconds_since(start);
    r.check(elapsed < 600.0, fmt("runtime %.1f s < 600 s", elapsed));
}

// 7. Ablation mechanics: fixed sharpness, feature truncation, sampled spatial branch.
void ablation_mechanics(Report& r)
{
    const auto& c = default_shapes();
    const std::size_t epoch = c.shapes.size() * (c.shapes.size() - 1);
    const TrainResult& curriculum = two_branch_run();
    TrainConfig fixed = trend_config(BranchMode::TwoBranch);
    fixed.alpha = {50.0, 0.0, 0};
    const TrainResult hard = train(c.shapes, fixed);
    const double curriculum_loss = final_loss(curriculum.history, epoch);
    const double fixed_loss = final_loss(hard.history, epoch);
    const auto last_epoch_terms = [epoch](const TrainResult& run) {
        const auto& h = run.history;
        const std::size_t begin = h.size() - std::min(epoch, h.size());
        double orth = 0.0, consist = 0.0;
        for (std::size_t s = begin; s < h.size(); ++s) {
            orth += h[s].terms.orth;
            consist += h[s].terms.consist;
        }
        const double count = static_cast<double>(h.size() - begin);
        return fmt("final alpha %.1f, ", h.back().alpha) + fmt("orth %.3f, ", orth / count) +
               fmt("consist %.3f", consist / count);
    };
    r.note("curriculum: " + last_epoch_terms(curriculum));
    r.note("fixed:      " + last_epoch_terms(hard));
    r.check(fixed_loss >= curriculum_loss,
            fmt("final loss alpha=50 fixed %.6f", fixed_loss) + fmt(" >= curriculum %.6f", curriculum_loss));

    const ShapeData& a = c.shapes[0];
    const ShapeData& b = c.shapes[3];
    const CoeffMatrix Aa{a.projected, a.id}, Ab{b.projected, b.id};
    const auto [ta, tb] = feature_svd_truncate(Aa, Ab, static_cast<int>(Aa.d()));
    const SoftMapStream full(aligned_embedding(a.basis, Aa), aligned_embedding(b.basis, Ab), 1.0);
    const SoftMapStream trunc(aligned_embedding(a.basis, ta), aligned_embedding(b.basis, tb), 1.0);
    RowMatrix d0, d1;
    full.residual_block(0, full.rows(), d0);
    trunc.residual_block(0, trunc.rows(), d1);
    const double diff = (d0 - d1).cwiseAbs().maxCoeff();
    r.check(diff <= 1e-8, fmt("m = d truncation changes residuals by %.2e <= 1e-8", diff));

    try {
        std::vector<ShapeData> sampled = c.shapes;
        for (auto& s : sampled) restrict_spatial_branch(s, farthest_point_sample(s.mesh, s.basis.n() / 2, 0));
        TrainConfig config = trend_config(BranchMode::TwoBranch);
        config.iterations = 60;
        const TrainResult run = train(sampled, config);
        const CycleMetrics m = cycle_metrics(run.model, sampled, config.lam);
        r.check(!run.diverged && std::isfinite(m.spatial) && std::isfinite(m.spectral),
                "farthest point sampling to half the vertices trains and evaluates");
    } catch (const Error& e) {
        r.check(false, std::string("farthest point sampling run failed: ") + e.what());
    }
}

// 8. Isometric pairs yield more diagonal maps than non-isometric ones.
void diagonal_diagnostic(Report& r)
{
    const Collection& c = default_shapes();
    auto solve = [&](const std::string& from, const std::string& to) {
        const ShapeData& a = c.shapes[static_cast<std::size_t>(index_of(c, from))];
        const ShapeData& b = c.shapes[static_cast<std::size_t>(index_of(c, to))];
        return solve_fmreg({a.projected, a.id}, {b.projected, b.id}, a.basis.lambda, b.basis.lambda, 1e-3).map;
    };
    const double iso = off_diagonal_fraction(solve("bumps_a", "bumps_a_perm").values);
    const double aniso = off_diagonal_fraction(solve("sphere", "aniso_05").values);
    r.check(iso < aniso, fmt("off-diagonal fraction permuted %.6f", iso) + fmt(" < anisotropic %.6f", aniso));
}

// 9. Soft-map rows are distributions; vanishing sharpness gives uniform rows.
void softmax_contract(Report& r)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    double worst_sum = 0.0, worst_uniform = 0.0;
    bool nonnegative = true;
    const int rows = 10000, cols = 64;
    for (int block = 0; block < 10; ++block) {
        RowMatrix residuals(rows / 10, cols);
        for (Eigen::Index q = 0; q < residuals.rows(); ++q)
            for (Eigen::Index p = 0; p < cols; ++p) residuals(q, p) = 10.0 * uniform(rng);
        RowMatrix tiny = residuals;
        const double alpha = std::pow(10.0, -1 + block * 0.6); // 0.1 .. ~25000
        softmax_rows(residuals, alpha);
        softmax_rows(tiny, 1e-12);
        nonnegative = nonnegative && residuals.minCoeff() >= 0.0;
        worst_sum = std::max(worst_sum, (residuals.rowwise().sum().array() - 1.0).abs().maxCoeff());
        worst_uniform = std::max(worst_uniform, (tiny.array() - 1.0 / cols).abs().maxCoeff());
    }
    r.check(nonnegative, "all entries nonnegative");
    r.check(worst_sum <= 1e-9, fmt("10^4 rows sum to 1 within %.2e <= 1e-9", worst_sum));
    r.check(worst_uniform <= 1e-9, fmt("alpha = 1e-12 rows uniform within %.2e <= 1e-9", worst_uniform));
}

// 10. Deterministic training through the command line.
void deterministic_training(Report& r)
{
    const fs::path dir = fs::temp_directory_path() / "cfm_acceptance_determinism";
    fs::remove_all(dir);
    if (call_cli({"synth", "-o", dir.string(), "--subdiv", "3", "--seed", "1"}) != 0) {
        r.check(false, "synth failed");
        return;
    }
    const std::string manifest = (dir / "manifest.txt").string();
    for (const char* tag : {"first", "second"}) {
        const int code = call_cli({"train", manifest, "--iters", "200", "--deterministic", "--seed", "7", "-o",
                                   (dir / (std::string(tag) + ".sscm")).string(), "--history",
                                   (dir / (std::string(tag) + ".csv")).string()});
        r.check(code == 0, std::string(tag) + " run exits 0");
    }
    const std::string ckpt = slurp(dir / "first.sscm"), hist = slurp(dir / "first.csv");
    r.check(!ckpt.empty() && ckpt == slurp(dir / "second.sscm"), "checkpoints byte-identical");
    r.check(!hist.empty() && hist == slurp(dir / "second.csv"), "histories byte-identical");
    fs::remove_all(dir);
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<void(Report&)>>> criteria{
        {"1 eigen correctness", eigen_correctness},
        {"2 identity pair", identity_pair},
        {"3 exact permutation pair", permutation_pair},
        {"4 cycle consistency from descriptor preservation", descriptor_cycle},
        {"5 gradient exactness", gradient_exactness},
        {"6 spatial branch cycle trend", cycle_trend},
        {"7 ablation mechanics", ablation_mechanics},
        {"8 diagonal diagnostic", diagonal_diagnostic},
        {"9 softmax contract", softmax_contract},
        {"10 deterministic training", deterministic_training},
    };
    int failures = 0;
    for (const auto& [name, body] : criteria) {
        Report report;
        const auto start = Clock::now();
        try {
            body(report);
        } catch (const std::exception& e) {
            report.check(false, std::string("exception: ") + e.what());
        }
        std::printf("criterion %s: %s (%.1f s)\n", name.c_str(), report.ok() ? "PASS" : "FAIL", seconds_since(start));
        for (const auto& line : report.lines()) std::printf("%s\n", line.c_str());
        std::fflush(stdout);
        failures += report.ok() ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
