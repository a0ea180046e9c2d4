#include <cfm/cli.hpp>
#include <cfm/consistency.hpp>
#include <cfm/descriptors.hpp>
#include <cfm/eval.hpp>
#include <cfm/fmap.hpp>
#include <cfm/io.hpp>
#include <cfm/manifest.hpp>
#include <cfm/mesh.hpp>
#include <cfm/optim.hpp>
#include <cfm/parallel.hpp>
#include <cfm/softmap.hpp>
#include <cfm/spectral.hpp>
#include <cfm/synth.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace cfm {

namespace {

const char* kExitCodeHelp = R"(Exit codes:
  0  success
  1  other failure (invalid argument, dimension mismatch, missing manifest data)
  2  usage error (unknown subcommand or flag, bad flag value)
  3  missing or unreadable/unwritable file
  4  file format violation (parse error, bad magic, version mismatch, truncation)
  5  invalid mesh (non-manifold, degenerate, disconnected, zero area, flipped)
  6  numerical failure (singular system, no convergence, divergence, non-finite)
)";

void need_file(const fs::path& path)
{
    if (!fs::is_regular_file(path)) fail(Errc::io_error, "no such file: " + path.string());
}

std::string fixed6(double v)
{
    if (std::abs(v) < 5e-7) v = 0.0;
    std::ostringstream s;
    s << std::fixed << std::setprecision(6) << v;
    return s.str();
}

TriMesh load_unit_mesh(const fs::path& path)
{
    need_file(path);
    return normalize_area(load_mesh(path));
}

std::string pair_stem(const std::string& src, const std::string& tgt) { return src + "__" + tgt; }

struct CollectionOptions
{
    int k = 50;
    int d_in = 128;
    int fps = 0;
    std::uint64_t seed = 0;
};

std::vector<ShapeData> load_collection(const Manifest& manifest, const CollectionOptions& opt)
{
    std::vector<ShapeData> shapes;
    shapes.reserve(manifest.shapes.size());
    for (const auto& entry : manifest.shapes) {
        TriMesh mesh = load_unit_mesh(entry.mesh).renamed(entry.id);
        SpectralBasis basis;
        if (entry.basis) {
            need_file(*entry.basis);
            basis = load_basis(*entry.basis);
            require(basis.n() == mesh.num_vertices(), Errc::dimension_mismatch,
                    "basis of '" + entry.id + "' does not match its mesh");
            require(basis.k() >= opt.k, Errc::dimension_mismatch,
                    "basis of '" + entry.id + "' holds " + std::to_string(basis.k()) + " < k eigenpairs");
            basis.phi.conservativeResize(Eigen::NoChange, opt.k);
            basis.lambda.conservativeResize(opt.k);
        } else {
            basis = compute_basis(mesh, opt.k);
        }
        Eigen::MatrixXd desc;
        if (entry.descriptors) {
            need_file(*entry.descriptors);
            desc = load_matrix(*entry.descriptors);
        } else {
            desc = wks(basis, opt.d_in).values;
        }
        ShapeData shape = prepare_shape(entry.id, mesh, std::move(basis), std::move(desc));
        if (opt.fps > 0) restrict_spatial_branch(shape, farthest_point_sample(shape.mesh, opt.fps, opt.seed));
        shapes.push_back(std::move(shape));
    }
    return shapes;
}

Manifest read_manifest_arg(const std::string& path)
{
    need_file(path);
    return load_manifest(path);
}


struct SynthArgs
{
    std::string out_dir;
    int subdiv = 3;
    std::uint64_t seed = 1;
};

int run_synth(const SynthArgs& a, std::ostream& out)
{
    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    const auto shapes = default_collection(a.subdiv, a.seed);
    Manifest manifest;
    manifest.all_pairs = true;
    for (const auto& s : shapes) {
        const std::string file = s.mesh.name() + ".obj";
        write_obj(dir / file, s.mesh);
        manifest.shapes.push_back({s.mesh.name(), file, std::nullopt, std::nullopt});
    }
    const int n = static_cast<int>(shapes.size());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto& si = shapes[static_cast<std::size_t>(i)];
            const auto& sj = shapes[static_cast<std::size_t>(j)];
            const GroundTruth gt = compose_ground_truth(si.from_base, sj.from_base);
            const std::string file = pair_stem(si.mesh.name(), sj.mesh.name()) + ".gt.map";
            save_pointmap(dir / file, {gt.assignment, sj.mesh.num_vertices(), si.mesh.name(), sj.mesh.name()});
            manifest.pairs.push_back({i, j, fs::path(file)});
        }
    }
    std::ofstream mf(dir / "manifest.txt");
    if (!mf) fail(Errc::io_error, "cannot write " + (dir / "manifest.txt").string());
    write_manifest(mf, manifest);
    out << "shapes: " << n << "\nvertices: " << shapes.front().mesh.num_vertices() << "\nmanifest: "
        << (dir / "manifest.txt").string() << '\n';
    return kExitOk;
}

struct EigenArgs
{
    std::string mesh;
    int k = 50;
    std::string output;
};

int run_eigen(const EigenArgs& a, std::ostream& out)
{
    const TriMesh mesh = load_unit_mesh(a.mesh);
    const LaplacianPair lap = cotan_laplacian(mesh);
    const SpectralBasis basis = compute_basis(lap, a.k);
    save_basis(a.output, basis);
    out << "vertices: " << basis.n() << "\nk: " << basis.k() << "\neigenvalues:";
    for (Eigen::Index i = 0; i < basis.lambda.size(); ++i) out << ' ' << fixed6(basis.lambda[i]);
    out << "\nmax_residual: " << std::scientific << std::setprecision(6) << eigen_residuals(lap, basis).maxCoeff()
        << std::defaultfloat << '\n';
    return kExitOk;
}

struct WksArgs
{
    std::string basis;
    int d = 128;
    std::string output;
};

int run_wks(const WksArgs& a, std::ostream& out)
{
    need_file(a.basis);
    const DescriptorSet desc = wks(load_basis(a.basis), a.d);
    save_matrix(a.output, desc.values);
    out << "vertices: " << desc.values.rows() << "\nd: " << desc.values.cols() << "\nsigma: " << fixed6(desc.sigma)
        << '\n';
    return kExitOk;
}

struct MatchArgs
{
    std::string basis_a, desc_a, basis_b, desc_b;
    double lam = 1e-3;
    std::optional<double> alpha;
    std::string model;
    std::string output;
    std::string pointmap;
};

int run_match(const MatchArgs& a, std::ostream& out)
{
    for (const auto& p : {a.basis_a, a.desc_a, a.basis_b, a.desc_b}) need_file(p);
    const SpectralBasis basis_a = load_basis(a.basis_a);
    const SpectralBasis basis_b = load_basis(a.basis_b);
    require(basis_a.k() == basis_b.k(), Errc::dimension_mismatch, "bases differ in k");
    const std::string id_a = fs::path(a.basis_a).stem().string();
    const std::string id_b = fs::path(a.basis_b).stem().string();
    CoeffMatrix A1 = project(basis_a, load_matrix(a.desc_a), id_a);
    CoeffMatrix A2 = project(basis_b, load_matrix(a.desc_b), id_b);
    if (!a.model.empty()) {
        need_file(a.model);
        const FeatureModel model = load_checkpoint(a.model);
        require(model.mode == FeatureMode::SharedLinear, Errc::invalid_argument,
                "match needs a shared-linear model; per-shape models only apply to their training collection");
        require(model.params.theta.rows() == A1.d(), Errc::dimension_mismatch,
                "model expects " + std::to_string(model.params.theta.rows()) + " descriptors");
        A1.values = A1.values * model.params.theta;
        A2.values = A2.values * model.params.theta;
    }
    const FmregResult res = solve_fmreg(A1, A2, basis_a.lambda, basis_b.lambda, a.lam);
    const Eigen::Index k = res.map.k();
    out << "k: " << k << "\nobjective: " << fixed6(res.objective) << "\ncondition: " << std::scientific
        << std::setprecision(6) << res.condition << std::defaultfloat
        << "\nidentity_residual: " << fixed6((res.map.values - Eigen::MatrixXd::Identity(k, k)).norm())
        << "\noff_diagonal_fraction: " << fixed6(off_diagonal_fraction(res.map.values)) << '\n';
    if (res.condition > kConditionWarning) out << "warning: descriptors are close to rank deficient\n";
    if (a.alpha) {
        const SoftMapStream stream(reconstruct(basis_a, A1), reconstruct(basis_b, A2), *a.alpha);
        const FunctionalMap C2 = softmap_to_fmap(stream, basis_a, basis_b);
        out << "consistency: " << fixed6((res.map.values - C2.values).squaredNorm()) << '\n';
    }
    if (!a.output.empty()) save_fmap(a.output, res.map);
    if (!a.pointmap.empty()) save_pointmap(a.pointmap, fmap_to_pointmap(res.map, basis_a, basis_b, Extraction::ForwardRows));
    return kExitOk;
}

struct TrainArgs
{
    std::string manifest;
    std::string mode = "two-branch";
    std::string model_mode = "shared";
    int k = 50;
    int d = 128;
    int d_in = 0;
    double lam = 1e-3;
    int iters = 10000;
    double lr = 2e-4;
    double alpha0 = 1.0;
    double alpha_step = 5.0;
    int epoch_len = 0;
    std::uint64_t seed = 0;
    int fps = 0;
    int svd_m = 0;
    bool deterministic = false;
    std::optional<double> w_orth, w_consist, w_desc, w_lap, w_bij;
    std::string output = "model.sscm";
    std::string history;
};

BranchMode parse_branch_mode(const std::string& s)
{
    if (s == "two-branch") return BranchMode::TwoBranch;
    if (s == "spectral-only") return BranchMode::SpectralOnly;
    return BranchMode::SpatialOnly;
}

int run_train(const TrainArgs& a, std::ostream& out, std::ostream& err)
{
    const Manifest manifest = read_manifest_arg(a.manifest);
    TrainConfig config;
    config.k = a.k;
    config.d = a.d;
    config.lam = a.lam;
    config.alpha = {a.alpha0, a.alpha_step, a.epoch_len};
    config.learning_rate = a.lr;
    config.iterations = a.iters;
    config.mode = parse_branch_mode(a.mode);
    config.weights = default_weights(config.mode, a.lam);
    if (a.w_orth) config.weights.orth = *a.w_orth;
    if (a.w_consist) config.weights.consist = *a.w_consist;
    if (a.w_desc) config.weights.desc = *a.w_desc;
    if (a.w_lap) config.weights.lap = *a.w_lap;
    if (a.w_bij) config.weights.bij = *a.w_bij;
    config.svd_m = a.svd_m;
    config.deterministic = a.deterministic;
    config.seed = a.seed;

    const int d_in = a.d_in > 0 ? a.d_in : a.d;
    const auto shapes = load_collection(manifest, {a.k, d_in, a.fps, a.seed});
    const FeatureMode feature_mode =
        a.model_mode == "direct" ? FeatureMode::DirectCoefficients : FeatureMode::SharedLinear;
    const TrainResult result = train(shapes, config, std::nullopt, feature_mode);

    if (!a.history.empty()) save_history_csv(a.history, result.history);
    save_checkpoint(a.output, result.model);
    const std::size_t window = std::min<std::size_t>(result.history.size(), manifest.shapes.size() *
                                                                                 (manifest.shapes.size() - 1));
    out << "iterations: " << result.history.size() << "\nfinal_alpha: " << fixed6(result.history.back().alpha)
        << "\nfinal_loss: " << fixed6(final_loss(result.history, window)) << '\n';
    if (result.diverged) {
        err << "error: " << to_string(Errc::divergence) << ": loss exceeded "
            << config.divergence_threshold << " at iteration " << result.history.back().iteration << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

struct InferArgs
{
    std::string manifest;
    std::string model;
    std::string output;
    double lam = 1e-3;
    int d_in = 128;
};

int run_infer(const InferArgs& a, std::ostream& out)
{
    const Manifest manifest = read_manifest_arg(a.manifest);
    need_file(a.model);
    const FeatureModel model = load_checkpoint(a.model);
    const int d_in = model.mode == FeatureMode::SharedLinear ? static_cast<int>(model.params.theta.rows()) : a.d_in;
    const auto shapes = load_collection(manifest, {model.k, d_in, 0, 0});
    fs::create_directories(a.output);
    int written = 0;
    for (const auto& [i, j] : manifest.selected_pairs()) {
        const FunctionalMap C = predict_fmap(model, shapes, i, j, a.lam);
        const auto& si = shapes[static_cast<std::size_t>(i)];
        const auto& sj = shapes[static_cast<std::size_t>(j)];
        const fs::path stem = fs::path(a.output) / pair_stem(si.id, sj.id);
        save_fmap(stem.string() + ".fmap", C);
        save_pointmap(stem.string() + ".map", fmap_to_pointmap(C, si.basis, sj.basis, Extraction::ForwardRows));
        ++written;
    }
    out << "pairs: " << written << '\n';
    return kExitOk;
}

struct EvalGeoArgs
{
    std::string pred, gt, mesh;
    std::string csv;
};

int run_eval_geo(const EvalGeoArgs& a, std::ostream& out)
{
    need_file(a.pred);
    need_file(a.gt);
    need_file(a.mesh);
    const PointMap pred = load_pointmap(a.pred);
    const PointMap gt = load_pointmap(a.gt);
    const TriMesh target = load_mesh(a.mesh);
    const GeodesicError res = geodesic_error(pred, to_ground_truth(gt), target);
    if (!a.csv.empty()) {
        std::ofstream csv(a.csv);
        if (!csv) fail(Errc::io_error, "cannot write " + a.csv);
        csv << "vertex,error\n";
        for (Eigen::Index v = 0; v < res.per_vertex.size(); ++v) csv << v << ',' << fixed6(res.per_vertex[v]) << '\n';
    }
    out << "mean_geo_err_x100: " << std::fixed << std::setprecision(3) << res.mean_x100 << std::defaultfloat << '\n';
    return kExitOk;
}

struct EvalCycleArgs
{
    std::string manifest, maps;
    int triplets = 1000;
    std::uint64_t seed = 0;
    bool geodesic = false;
    std::string csv;
};

int run_eval_cycle(const EvalCycleArgs& a, std::ostream& out)
{
    const Manifest manifest = read_manifest_arg(a.manifest);
    const int n = static_cast<int>(manifest.shapes.size());
    const TripletSample sample = sample_triplets(n, a.triplets, a.seed);
    std::vector<TriMesh> meshes;
    for (const auto& s : manifest.shapes) meshes.push_back(load_unit_mesh(s.mesh).renamed(s.id));

    FunctionalMapSet fmaps;
    PointMapSet pmaps;
    for (const auto& t : sample.triplets) {
        for (int e = 0; e < 3; ++e) {
            const int i = t[static_cast<std::size_t>(e)];
            const int j = t[static_cast<std::size_t>((e + 1) % 3)];
            if (fmaps.count({i, j})) continue;
            const fs::path stem = fs::path(a.maps) / pair_stem(manifest.shapes[static_cast<std::size_t>(i)].id,
                                                               manifest.shapes[static_cast<std::size_t>(j)].id);
            need_file(stem.string() + ".fmap");
            need_file(stem.string() + ".map");
            fmaps.emplace(PairKey{i, j}, load_fmap(stem.string() + ".fmap"));
            pmaps.emplace(PairKey{i, j}, load_pointmap(stem.string() + ".map"));
        }
    }
    const DeviationMetric metric = a.geodesic ? DeviationMetric::Geodesic : DeviationMetric::Euclidean;
    const double spectral = spectral_cycle_residual(fmaps, sample);
    const double spatial = spatial_cycle_deviation(pmaps, meshes, sample, metric);
    if (!a.csv.empty()) {
        std::ofstream csv(a.csv);
        if (!csv) fail(Errc::io_error, "cannot write " + a.csv);
        csv << "i,j,l,spectral_residual,spatial_deviation\n";
        for (const auto& t : sample.triplets) {
            TripletSample one{{t}, 1, a.seed};
            csv << t[0] << ',' << t[1] << ',' << t[2] << ',' << fixed6(spectral_cycle_residual(fmaps, t)) << ','
                << fixed6(spatial_cycle_deviation(pmaps, meshes, one, metric)) << '\n';
        }
        csv << "mean,,," << fixed6(spectral) << ',' << fixed6(spatial) << '\n';
    }
    out << "triplets: " << sample.triplets.size() << "\nspectral_cycle_residual: " << fixed6(spectral)
        << "\nspatial_cycle_deviation: " << fixed6(spatial) << '\n';
    return kExitOk;
}

} // namespace

int exit_code_for(Errc code)
{
    switch (code) {
    case Errc::io_error: return kExitMissingFile;
    case Errc::parse_error:
    case Errc::bad_magic:
    case Errc::version_mismatch:
    case Errc::truncated:
    case Errc::index_out_of_range: return kExitFormat;
    case Errc::non_manifold:
    case Errc::degenerate_triangle:
    case Errc::disconnected:
    case Errc::zero_area:
    case Errc::triangle_flip: return kExitInvalidMesh;
    case Errc::singular_system:
    case Errc::no_convergence:
    case Errc::unreachable:
    case Errc::divergence:
    case Errc::non_finite: return kExitNumerical;
    case Errc::invalid_argument:
    case Errc::dimension_mismatch:
    case Errc::missing_data: return kExitOther;
    }
    return kExitOther;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Spectral shape correspondence with two-branch consistency training"};
    app.footer(kExitCodeHelp);
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: $CFM_THREADS or 1)")->check(CLI::NonNegativeNumber);

    std::function<int()> action;

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Write the default synthetic collection, ground truth and manifest");
    c_synth->add_option("-o,--output", synth.out_dir, "Output directory")->required();
    c_synth->add_option("--subdiv", synth.subdiv, "Icosphere subdivision level")->check(CLI::Range(0, 6));
    c_synth->add_option("--seed", synth.seed, "Deformation seed");
    c_synth->callback([&] { action = [&] { return run_synth(synth, out); }; });

    EigenArgs eig;
    auto* c_eigen = app.add_subcommand("eigen", "Laplace-Beltrami eigenbasis of an area-normalized mesh");
    c_eigen->add_option("mesh", eig.mesh, "OFF or OBJ mesh")->required();
    c_eigen->add_option("-k", eig.k, "Number of eigenpairs")->check(CLI::PositiveNumber);
    c_eigen->add_option("-o,--output", eig.output, "Basis file")->required();
    c_eigen->callback([&] { action = [&] { return run_eigen(eig, out); }; });

    WksArgs wk;
    auto* c_wks = app.add_subcommand("wks", "Wave kernel signature descriptors");
    c_wks->add_option("basis", wk.basis, "Basis file")->required();
    c_wks->add_option("-d", wk.d, "Number of energies")->check(CLI::PositiveNumber);
    c_wks->add_option("-o,--output", wk.output, "Descriptor matrix file")->required();
    c_wks->callback([&] { action = [&] { return run_wks(wk, out); }; });

    MatchArgs mt;
    auto* c_match = app.add_subcommand("match", "One-shot functional map between two shapes");
    c_match->add_option("basisA", mt.basis_a)->required();
    c_match->add_option("descA", mt.desc_a)->required();
    c_match->add_option("basisB", mt.basis_b)->required();
    c_match->add_option("descB", mt.desc_b)->required();
    c_match->add_option("--lam", mt.lam, "Laplacian commutativity weight")->check(CLI::NonNegativeNumber);
    c_match->add_option("--alpha", mt.alpha, "Also report the soft-map consistency at this sharpness")
        ->check(CLI::PositiveNumber);
    c_match->add_option("--model", mt.model, "Shared-linear checkpoint applied to both descriptor sets");
    c_match->add_option("-o,--output", mt.output, "Functional map file");
    c_match->add_option("--pointmap", mt.pointmap, "Point map file (A to B)");
    c_match->callback([&] { action = [&] { return run_match(mt, out); }; });

    TrainArgs tr;
    auto* c_train = app.add_subcommand("train", "Train a feature model on a manifest collection");
    c_train->add_option("manifest", tr.manifest)->required();
    c_train->add_option("--mode", tr.mode, "Branches")
        ->check(CLI::IsMember({"two-branch", "spectral-only", "spatial-only"}));
    c_train->add_option("--model-mode", tr.model_mode, "Feature model")->check(CLI::IsMember({"shared", "direct"}));
    c_train->add_option("-k", tr.k, "Basis size")->check(CLI::PositiveNumber);
    c_train->add_option("-d", tr.d, "Feature width")->check(CLI::PositiveNumber);
    c_train->add_option("--d-in", tr.d_in, "Input WKS width (default: d)")->check(CLI::NonNegativeNumber);
    c_train->add_option("--lam", tr.lam)->check(CLI::NonNegativeNumber);
    c_train->add_option("--iters", tr.iters)->check(CLI::PositiveNumber);
    c_train->add_option("--lr", tr.lr)->check(CLI::PositiveNumber);
    c_train->add_option("--alpha0", tr.alpha0)->check(CLI::PositiveNumber);
    c_train->add_option("--alpha-step", tr.alpha_step, "Sharpness increase per epoch")->check(CLI::NonNegativeNumber);
    c_train->add_option("--epoch-len", tr.epoch_len, "Steps per epoch (default: number of ordered pairs)")
        ->check(CLI::NonNegativeNumber);
    c_train->add_option("--seed", tr.seed);
    c_train->add_option("--fps", tr.fps, "Restrict the spatial branch to this many farthest point samples")
        ->check(CLI::NonNegativeNumber);
    c_train->add_option("--svd-m", tr.svd_m, "Truncate spatial features to the top m right singular vectors")
        ->check(CLI::NonNegativeNumber);
    c_train->add_flag("--deterministic", tr.deterministic, "Fixed reduction order");
    c_train->add_option("--w-orth", tr.w_orth)->check(CLI::NonNegativeNumber);
    c_train->add_option("--w-consist", tr.w_consist)->check(CLI::NonNegativeNumber);
    c_train->add_option("--w-desc", tr.w_desc)->check(CLI::NonNegativeNumber);
    c_train->add_option("--w-lap", tr.w_lap)->check(CLI::NonNegativeNumber);
    c_train->add_option("--w-bij", tr.w_bij)->check(CLI::NonNegativeNumber);
    c_train->add_option("-o,--output", tr.output, "Checkpoint file");
    c_train->add_option("--history", tr.history, "History CSV file");
    c_train->callback([&] { action = [&] { return run_train(tr, out, err); }; });

    InferArgs inf;
    auto* c_infer = app.add_subcommand("infer", "Functional and point maps for every manifest pair");
    c_infer->add_option("manifest", inf.manifest)->required();
    c_infer->add_option("--model", inf.model, "Checkpoint")->required();
    c_infer->add_option("-o,--output", inf.output, "Output directory")->required();
    c_infer->add_option("--lam", inf.lam)->check(CLI::NonNegativeNumber);
    c_infer->add_option("--d-in", inf.d_in, "WKS width for per-shape models")->check(CLI::PositiveNumber);
    c_infer->callback([&] { action = [&] { return run_infer(inf, out); }; });

    EvalGeoArgs eg;
    auto* c_geo = app.add_subcommand("eval-geo", "Mean geodesic error of a point map");
    c_geo->add_option("pred", eg.pred)->required();
    c_geo->add_option("gt", eg.gt)->required();
    c_geo->add_option("target", eg.mesh, "Unit-area target mesh")->required();
    c_geo->add_option("--csv", eg.csv, "Per-vertex errors");
    c_geo->callback([&] { action = [&] { return run_eval_geo(eg, out); }; });

    EvalCycleArgs ec;
    auto* c_cycle = app.add_subcommand("eval-cycle", "Cycle consistency over sampled triplets");
    c_cycle->add_option("manifest", ec.manifest)->required();
    c_cycle->add_option("maps", ec.maps, "Directory written by infer")->required();
    c_cycle->add_option("--triplets", ec.triplets)->check(CLI::NonNegativeNumber);
    c_cycle->add_option("--seed", ec.seed);
    c_cycle->add_flag("--geodesic", ec.geodesic, "Measure deviation along the surface");
    c_cycle->add_option("--csv", ec.csv, "Per-triplet report");
    c_cycle->callback([&] { action = [&] { return run_eval_cycle(ec, out); }; });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const int previous_threads = thread_count();
    if (threads > 0) set_thread_count(threads);
    int status = kExitOther;
    try {
        status = action();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        status = exit_code_for(e.code());
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        status = kExitMissingFile;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        status = kExitOther;
    }
    set_thread_count(previous_threads);
    return status;
}

} // namespace cfm
