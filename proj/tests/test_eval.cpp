#include "fixtures.hpp"

#include <cfm/error.hpp>
#include <cfm/eval.hpp>
#include <cfm/mesh.hpp>
#include <cfm/synth.hpp>

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace cfm;

namespace {

PointMap as_pointmap(std::vector<int> assignment, int n_to)
{
    return PointMap{std::move(assignment), n_to, "src", "tgt"};
}

std::vector<int> iota_vector(int n)
{
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return v;
}

} // namespace

TEST_CASE("geodesic error of exact and perturbed predictions")
{
    const TriMesh target = normalize_area(make_icosphere(2));
    const int n = target.num_vertices();
    const GroundTruth gt{iota_vector(n), std::nullopt};

    CHECK(geodesic_error(as_pointmap(gt.assignment, n), gt, target).mean_x100 == 0.0);

    SUBCASE("prediction one edge away")
    {
        std::vector<int> shifted(static_cast<std::size_t>(n), -1);
        double expected = 0.0;
        for (const auto& [p, q] : edges(target)) {
            if (shifted[p] < 0) shifted[p] = q;
            if (shifted[q] < 0) shifted[q] = p;
        }
        for (int p = 0; p < n; ++p) expected += (target.vertices().row(p) - target.vertices().row(shifted[p])).norm();
        const GeodesicError e = geodesic_error(as_pointmap(shifted, n), gt, target);
        CHECK(e.mean_x100 == doctest::Approx(100.0 * expected / n).epsilon(1e-12));
        // The icosphere's edges are nearly uniform, so this is close to the mean incident edge length.
        CHECK(e.mean_x100 == doctest::Approx(100.0 * mean_incident_edge_length(target).mean()).epsilon(0.15));
    }
    SUBCASE("constant prediction matches the mean distance field")
    {
        const int v = 17;
        const GeodesicError e = geodesic_error(as_pointmap(std::vector<int>(static_cast<std::size_t>(n), v), n), gt,
                                               target);
        CHECK(e.mean_x100 == doctest::Approx(100.0 * geodesic_distances(target, v).mean()).epsilon(1e-12));
    }
    SUBCASE("masked vertices are skipped")
    {
        GroundTruth masked = gt;
        masked.mask = std::vector<bool>(static_cast<std::size_t>(n), true);
        std::vector<int> pred = gt.assignment;
        pred[0] = 5;
        (*masked.mask)[0] = false;
        const GeodesicError e = geodesic_error(as_pointmap(pred, n), masked, target);
        CHECK(e.mean_x100 == 0.0);
        CHECK(std::isnan(e.per_vertex[0]));
    }
}

TEST_CASE("geodesic error invariances")
{
    const TriMesh target = normalize_area(test::generic_sphere(2));
    const int n = target.num_vertices();
    std::vector<int> pred(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) pred[p] = (7 * p + 3) % n;
    const GroundTruth gt{iota_vector(n), std::nullopt};
    const double base = geodesic_error(as_pointmap(pred, n), gt, target).mean_x100;

    const TriMesh moved = deform(target, {DeformKind::RigidMotion, 1.2, 3}).first;
    CHECK(geodesic_error(as_pointmap(pred, n), gt, moved).mean_x100 == doctest::Approx(base).epsilon(1e-10));

    // Joint relabelling of source vertices.
    std::vector<int> perm_pred(pred.size()), perm_gt(pred.size());
    for (int p = 0; p < n; ++p) {
        perm_pred[static_cast<std::size_t>((p * 5 + 1) % n)] = pred[p];
        perm_gt[static_cast<std::size_t>((p * 5 + 1) % n)] = p;
    }
    CHECK(geodesic_error(as_pointmap(perm_pred, n), {perm_gt, std::nullopt}, target).mean_x100 ==
          doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("geodesic error rejects unnormalized targets and bad layouts")
{
    const TriMesh sphere = make_icosphere(1);
    const int n = sphere.num_vertices();
    const GroundTruth gt{iota_vector(n), std::nullopt};
    CHECK_THROWS_AS(geodesic_error(as_pointmap(gt.assignment, n), gt, sphere), Error);
    const TriMesh unit = normalize_area(sphere);
    CHECK_THROWS_AS(geodesic_error(as_pointmap(iota_vector(n - 1), n), gt, unit), Error);
}

TEST_CASE("accuracy curve")
{
    Eigen::VectorXd errors(2);
    errors << 0.1, 0.3;
    CHECK(accuracy_curve(errors, {0.2, 0.4}) == std::vector<double>{0.5, 1.0});
    CHECK(accuracy_curve(Eigen::VectorXd::Zero(5), {0.01, 1.0}) == std::vector<double>{1.0, 1.0});
    CHECK(accuracy_curve(errors, {}).empty());
    CHECK(accuracy_curve(errors, {INFINITY}) == std::vector<double>{1.0});
    CHECK_THROWS_AS(accuracy_curve(errors, {0.4, 0.2}), Error);

    const Eigen::VectorXd many = test::random_matrix(200, 1, 3).cwiseAbs();
    const std::vector<double> curve = accuracy_curve(many, {0.0, 0.5, 1.0, 1.5, 2.0, 3.0});
    for (std::size_t t = 1; t < curve.size(); ++t) CHECK(curve[t] >= curve[t - 1]);
    for (double v : curve) CHECK((v >= 0.0 && v <= 1.0));
}
