#include <cfm/error.hpp>
#include <cfm/eval.hpp>
#include <cfm/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace cfm {

GeodesicError geodesic_error(const PointMap& pred, const GroundTruth& gt, const TriMesh& target)
{
    const int n = pred.n_from();
    require(n > 0, Errc::invalid_argument, "empty prediction");
    require(static_cast<int>(gt.assignment.size()) == n, Errc::dimension_mismatch,
            "prediction has " + std::to_string(n) + " source vertices, ground truth has " +
                std::to_string(gt.assignment.size()));
    require(!gt.mask || static_cast<int>(gt.mask->size()) == n, Errc::dimension_mismatch,
            "mask length differs from the ground truth");
    require(pred.n_to == target.num_vertices(), Errc::dimension_mismatch,
            "prediction targets a mesh with a different vertex count");
    const double area = surface_area(target);
    require(std::abs(area - 1.0) <= 1e-6, Errc::invalid_argument,
            "target mesh must be normalized to unit area (area " + std::to_string(area) + ")");

    const int n_tgt = target.num_vertices();
    auto annotated = [&](int v) { return !gt.mask || (*gt.mask)[static_cast<std::size_t>(v)]; };
    std::vector<int> sources;
    std::unordered_map<int, std::size_t> slot;
    for (int v = 0; v < n; ++v) {
        if (!annotated(v)) continue;
        const int g = gt.assignment[static_cast<std::size_t>(v)];
        const int p = pred.assignment[static_cast<std::size_t>(v)];
        require(g >= 0 && g < n_tgt && p >= 0 && p < n_tgt, Errc::index_out_of_range,
                "correspondence index outside the target mesh at vertex " + std::to_string(v));
        if (slot.emplace(g, sources.size()).second) sources.push_back(g);
    }
    require(!sources.empty(), Errc::invalid_argument, "no annotated vertices");

    const EdgeGraph graph(target);
    std::vector<Eigen::VectorXd> fields(sources.size());
    parallel_for(0, static_cast<std::ptrdiff_t>(sources.size()),
                 [&](std::ptrdiff_t s) { fields[static_cast<std::size_t>(s)] = graph.distances_from(sources[s]); });

    GeodesicError out;
    out.per_vertex = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
    double total = 0.0;
    int counted = 0;
    for (int v = 0; v < n; ++v) {
        if (!annotated(v)) continue;
        const auto& field = fields[slot.at(gt.assignment[static_cast<std::size_t>(v)])];
        out.per_vertex[v] = field[pred.assignment[static_cast<std::size_t>(v)]];
        total += out.per_vertex[v];
        ++counted;
    }
    out.mean_x100 = 100.0 * total / counted;
    return out;
}

std::vector<double> accuracy_curve(const Eigen::VectorXd& errors, const std::vector<double>& thresholds)
{
    require(std::is_sorted(thresholds.begin(), thresholds.end()), Errc::invalid_argument,
            "thresholds must be sorted ascending");
    std::vector<double> valid;
    for (Eigen::Index v = 0; v < errors.size(); ++v)
        if (!std::isnan(errors[v])) valid.push_back(errors[v]);
    std::sort(valid.begin(), valid.end());
    std::vector<double> curve;
    curve.reserve(thresholds.size());
    for (double t : thresholds) {
        if (valid.empty()) {
            curve.push_back(0.0);
            continue;
        }
        const auto below = std::upper_bound(valid.begin(), valid.end(), t) - valid.begin();
        curve.push_back(static_cast<double>(below) / static_cast<double>(valid.size()));
    }
    return curve;
}

} // namespace cfm
