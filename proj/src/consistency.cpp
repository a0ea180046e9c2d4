#include <cfm/consistency.hpp>
#include <cfm/error.hpp>
#include <cfm/parallel.hpp>

#include <random>
#include <set>
#include <string>

namespace cfm {

namespace {

std::string pair_name(int i, int j) { return "(" + std::to_string(i) + ", " + std::to_string(j) + ")"; }

const FunctionalMap& lookup(const FunctionalMapSet& maps, int i, int j)
{
    const auto it = maps.find({i, j});
    if (it == maps.end()) fail(Errc::missing_data, "no functional map for pair " + pair_name(i, j));
    return it->second;
}

const PointMap& lookup(const PointMapSet& maps, int i, int j)
{
    const auto it = maps.find({i, j});
    if (it == maps.end()) fail(Errc::missing_data, "no point map for pair " + pair_name(i, j));
    return it->second;
}

Eigen::MatrixXd cycle(const FunctionalMapSet& maps, const std::array<int, 3>& t)
{
    const auto [i, j, l] = t;
    const Eigen::MatrixXd& Cij = lookup(maps, i, j).values;
    const Eigen::MatrixXd& Cjl = lookup(maps, j, l).values;
    const Eigen::MatrixXd& Cli = lookup(maps, l, i).values;
    require(Cij.rows() == Cij.cols() && Cjl.rows() == Cij.rows() && Cjl.cols() == Cij.rows() &&
                Cli.rows() == Cij.rows() && Cli.cols() == Cij.rows(),
            Errc::dimension_mismatch, "maps in cycle " + pair_name(i, j) + " do not share k");
    return Cli * Cjl * Cij;
}

// Per-triple values are computed independently and summed in sample order.
template <typename F>
double ordered_mean(const TripletSample& sample, F&& value)
{
    require(!sample.triplets.empty(), Errc::invalid_argument, "empty triplet sample");
    std::vector<double> parts(sample.triplets.size());
    parallel_for(0, static_cast<std::ptrdiff_t>(parts.size()),
                 [&](std::ptrdiff_t t) { parts[static_cast<std::size_t>(t)] = value(sample.triplets[t]); });
    double total = 0.0;
    for (double v : parts) total += v;
    return total / static_cast<double>(parts.size());
}

} // namespace

TripletSample sample_triplets(int n_shapes, int count, std::uint64_t seed, bool unique)
{
    require(n_shapes >= 3, Errc::invalid_argument, "triplets need at least 3 shapes, got " + std::to_string(n_shapes));
    require(count >= 0, Errc::invalid_argument, "triplet count must be nonnegative");
    if (unique) {
        const long long available = 1LL * n_shapes * (n_shapes - 1) * (n_shapes - 2);
        require(count <= available, Errc::invalid_argument,
                "only " + std::to_string(available) + " distinct triplets exist");
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, n_shapes - 1);
    TripletSample out;
    out.count = count;
    out.seed = seed;
    std::set<std::array<int, 3>> seen;
    while (static_cast<int>(out.triplets.size()) < count) {
        const std::array<int, 3> t{pick(rng), pick(rng), pick(rng)};
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) continue;
        if (unique && !seen.insert(t).second) continue;
        out.triplets.push_back(t);
    }
    return out;
}

double spectral_cycle_residual(const FunctionalMapSet& maps, const std::array<int, 3>& t)
{
    const Eigen::MatrixXd loop = cycle(maps, t);
    const Eigen::Index k = loop.rows();
    return (loop - Eigen::MatrixXd::Identity(k, k)).squaredNorm() / static_cast<double>(k);
}

double spectral_cycle_residual(const FunctionalMapSet& maps, const TripletSample& sample)
{
    for (const auto& t : sample.triplets) cycle(maps, t); // surface missing pairs before going parallel
    return ordered_mean(sample, [&](const std::array<int, 3>& t) { return spectral_cycle_residual(maps, t); });
}

double functional_cycle_residual_on_A(const FunctionalMapSet& maps, const std::vector<CoeffMatrix>& coeffs,
                                      const std::array<int, 3>& t)
{
    const int i = t[0];
    require(i >= 0 && i < static_cast<int>(coeffs.size()), Errc::missing_data,
            "no coefficient matrix for shape " + std::to_string(i));
    const Eigen::MatrixXd& A = coeffs[static_cast<std::size_t>(i)].values;
    const Eigen::MatrixXd loop = cycle(maps, t);
    require(A.rows() == loop.rows(), Errc::dimension_mismatch, "coefficient matrix does not match map size");
    const double norm = A.norm();
    require(norm > 0.0, Errc::invalid_argument, "coefficient matrix of shape " + std::to_string(i) + " is zero");
    return (loop * A - A).norm() / norm;
}

double functional_cycle_residual_on_A(const FunctionalMapSet& maps, const std::vector<CoeffMatrix>& coeffs,
                                      const TripletSample& sample)
{
    for (const auto& t : sample.triplets) functional_cycle_residual_on_A(maps, coeffs, t);
    return ordered_mean(sample,
                        [&](const std::array<int, 3>& t) { return functional_cycle_residual_on_A(maps, coeffs, t); });
}

double spatial_cycle_deviation(const PointMapSet& maps, const std::vector<TriMesh>& meshes,
                               const TripletSample& sample, DeviationMetric metric)
{
    const int count = static_cast<int>(meshes.size());
    for (const auto& t : sample.triplets) {
        for (int e = 0; e < 3; ++e) {
            const int a = t[static_cast<std::size_t>(e)];
            const int b = t[static_cast<std::size_t>((e + 1) % 3)];
            require(a >= 0 && a < count && b >= 0 && b < count, Errc::index_out_of_range,
                    "triplet index outside collection");
            const PointMap& m = lookup(maps, a, b);
            require(m.n_from() == meshes[static_cast<std::size_t>(a)].num_vertices() &&
                        m.n_to == meshes[static_cast<std::size_t>(b)].num_vertices(),
                    Errc::dimension_mismatch, "point map " + pair_name(a, b) + " does not run from shape " +
                                                  std::to_string(a) + " to shape " + std::to_string(b));
            const std::string& from_name = meshes[static_cast<std::size_t>(a)].name();
            const std::string& to_name = meshes[static_cast<std::size_t>(b)].name();
            require((m.from_id.empty() || from_name.empty() || m.from_id == from_name) &&
                        (m.to_id.empty() || to_name.empty() || m.to_id == to_name),
                    Errc::invalid_argument,
                    "point map stored as " + pair_name(a, b) + " runs " + m.from_id + " -> " + m.to_id);
            for (int v : m.assignment)
                require(v >= 0 && v < m.n_to, Errc::index_out_of_range, "point map " + pair_name(a, b) +
                                                                              " has an out-of-range entry");
        }
    }

    std::map<int, EdgeGraph> graphs;
    if (metric == DeviationMetric::Geodesic)
        for (const auto& t : sample.triplets)
            if (!graphs.count(t[0])) graphs.emplace(t[0], EdgeGraph(meshes[static_cast<std::size_t>(t[0])]));

    return ordered_mean(sample, [&](const std::array<int, 3>& t) {
        const auto [i, j, l] = t;
        const PointMap& ij = lookup(maps, i, j);
        const PointMap& jl = lookup(maps, j, l);
        const PointMap& li = lookup(maps, l, i);
        const Vertices& pos = meshes[static_cast<std::size_t>(i)].vertices();
        double total = 0.0;
        for (int p = 0; p < ij.n_from(); ++p) {
            const int back = li.assignment[static_cast<std::size_t>(
                jl.assignment[static_cast<std::size_t>(ij.assignment[static_cast<std::size_t>(p)])])];
            if (metric == DeviationMetric::Euclidean) {
                total += (pos.row(back) - pos.row(p)).norm();
            } else {
                total += graphs.at(i).distances_from(p)[back];
            }
        }
        return total / static_cast<double>(ij.n_from());
    });
}

} // namespace cfm
