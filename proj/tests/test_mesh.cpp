#include "fixtures.hpp"

#include <cfm/error.hpp>
#include <cfm/mesh.hpp>
#include <cfm/synth.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

using namespace cfm;

namespace {

const char* kTetOff = R"(OFF
# regular tetrahedron
4 4 0
0 0 0
1 0 0
0.5 0.8660254037844386 0
0.5 0.28867513459481287 0.816496580927726
3 0 2 1
3 0 1 3
3 1 2 3
3 2 0 3
)";

const char* kTetObj = R"(# same tetrahedron
v 0 0 0
v 1 0 0
v 0.5 0.8660254037844386 0
v 0.5 0.28867513459481287 0.816496580927726
f 1 3 2
f 1 2 4
f 2/7 3/8 4/9
f 3//1 1//1 4//1
)";

Errc error_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::parse_error;
}

/// Strip of unit squares along x, split into triangles.
TriMesh segment_strip(int cells)
{
    Vertices V(2 * (cells + 1), 3);
    for (int i = 0; i <= cells; ++i) {
        V.row(2 * i) << i, 0, 0;
        V.row(2 * i + 1) << i, 0.1, 0;
    }
    Triangles F(2 * cells, 3);
    for (int i = 0; i < cells; ++i) {
        F.row(2 * i) << 2 * i, 2 * i + 2, 2 * i + 1;
        F.row(2 * i + 1) << 2 * i + 1, 2 * i + 2, 2 * i + 3;
    }
    return TriMesh(V, F);
}

} // namespace

TEST_CASE("OFF tetrahedron loads with Euler characteristic 2")
{
    std::istringstream in(kTetOff);
    const TriMesh mesh = read_off(in, "tet");
    CHECK(mesh.num_vertices() == 4);
    CHECK(mesh.num_triangles() == 4);
    CHECK(euler_characteristic(mesh) == 2);
    CHECK(mesh.name() == "tet");
}

TEST_CASE("OBJ and OFF of the same tetrahedron give identical arrays")
{
    std::istringstream off(kTetOff), obj(kTetObj);
    const TriMesh a = read_off(off), b = read_obj(obj);
    CHECK(a.vertices() == b.vertices());
    CHECK(a.triangles() == b.triangles());
}

TEST_CASE("OBJ writer round trips exactly")
{
    const TriMesh mesh = test::generic_sphere(1);
    std::stringstream buf;
    write_obj(buf, mesh);
    const TriMesh back = read_obj(buf);
    CHECK(back.vertices() == mesh.vertices());
    CHECK(back.triangles() == mesh.triangles());
}

TEST_CASE("load errors carry distinct codes")
{
    SUBCASE("face index out of range")
    {
        std::string text = kTetOff;
        text.replace(text.find("3 2 0 3"), 7, "3 2 0 9");
        std::istringstream in(text);
        CHECK(error_of([&] { read_off(in); }) == Errc::index_out_of_range);
    }
    SUBCASE("parse failure")
    {
        std::istringstream in("OFF\n4 4 0\n0 0 zero\n");
        CHECK(error_of([&] { read_off(in); }) == Errc::parse_error);
    }
    SUBCASE("degenerate triangle")
    {
        Vertices V(3, 3);
        V << 0, 0, 0, 1, 0, 0, 2, 0, 0;
        Triangles F(1, 3);
        F << 0, 1, 2;
        CHECK(error_of([&] { TriMesh(V, F); }) == Errc::degenerate_triangle);
    }
    SUBCASE("non-manifold edge")
    {
        Vertices V(5, 3);
        V << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1;
        Triangles F(3, 3);
        F << 0, 1, 2, 0, 1, 3, 0, 1, 4;
        CHECK(error_of([&] { TriMesh(V, F); }) == Errc::non_manifold);
    }
    SUBCASE("disconnected")
    {
        Vertices V(6, 3);
        V << 0, 0, 0, 1, 0, 0, 0, 1, 0, 5, 0, 0, 6, 0, 0, 5, 1, 0;
        Triangles F(2, 3);
        F << 0, 1, 2, 3, 4, 5;
        CHECK(error_of([&] { TriMesh(V, F); }) == Errc::disconnected);
    }
    SUBCASE("missing file")
    {
        CHECK(error_of([] { load_mesh("/nonexistent/shape.off"); }) == Errc::io_error);
    }
}

TEST_CASE("unit-edge tetrahedron areas")
{
    const TriMesh tet = test::unit_tetrahedron();
    CHECK(surface_area(tet) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
    const Eigen::VectorXd a = vertex_areas(tet);
    for (int p = 0; p < 4; ++p) CHECK(a[p] == doctest::Approx(std::sqrt(3.0) / 4).epsilon(1e-14));

    const TriMesh unit = normalize_area(tet);
    CHECK(surface_area(unit) == doctest::Approx(1.0).epsilon(1e-12));
    const double scale = std::pow(3.0, -0.25);
    CHECK((unit.vertices() - scale * tet.vertices()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(vertex_areas(unit).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(unit.triangles() == tet.triangles());
}

TEST_CASE("normalize_area is idempotent and scale invariant")
{
    const TriMesh mesh = test::generic_sphere(2, 9);
    const TriMesh once = normalize_area(mesh);
    const TriMesh twice = normalize_area(once);
    CHECK((twice.vertices() - once.vertices()).cwiseAbs().maxCoeff() < 1e-15);

    const TriMesh big = mesh.with_vertices(10.0 * mesh.vertices());
    CHECK((normalize_area(big).vertices() - once.vertices()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("vertex areas partition the surface area")
{
    const TriMesh mesh = make_icosphere(3).with_vertices(2.5 * make_icosphere(3).vertices());
    const Eigen::VectorXd a = vertex_areas(mesh);
    CHECK(a.minCoeff() > 0.0);
    CHECK(a.sum() == doctest::Approx(surface_area(mesh)).epsilon(1e-12));
}

TEST_CASE("farthest point sampling")
{
    const TriMesh mesh = test::generic_sphere(2);
    const int n = mesh.num_vertices();

    SUBCASE("count = n exhausts the vertices deterministically")
    {
        const SampleSet s = farthest_point_sample(mesh, n, 4);
        std::vector<int> sorted = s.indices;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < n; ++i) CHECK(sorted[i] == i);
        CHECK(farthest_point_sample(mesh, n, 4).indices == s.indices);
        CHECK(s.indices.front() == 4);
    }
    SUBCASE("segment: the far end comes second")
    {
        const TriMesh strip = segment_strip(6);
        const SampleSet s = farthest_point_sample(strip, 2, 0);
        CHECK(s.indices[0] == 0);
        CHECK(s.indices[1] == 13);
    }
    SUBCASE("indices are unique with the requested length")
    {
        const SampleSet s = farthest_point_sample(make_icosphere(4), 1500, 17);
        CHECK(s.indices.size() == 1500);
        CHECK(std::set<int>(s.indices.begin(), s.indices.end()).size() == 1500);
    }
    SUBCASE("count above n is an error")
    {
        CHECK(error_of([&] { farthest_point_sample(mesh, n + 1, 0); }) == Errc::invalid_argument);
    }
    SUBCASE("permutation equivariance")
    {
        const auto [permuted, gt] = deform(mesh, {DeformKind::VertexPermutation, 1.0, 5});
        const SampleSet a = farthest_point_sample(mesh, 40, 7);
        const SampleSet b = farthest_point_sample(permuted, 40, gt.assignment[7]);
        for (int i = 0; i < 40; ++i) CHECK(b.indices[i] == gt.assignment[a.indices[i]]);
    }
}

TEST_CASE("graph geodesics")
{
    const TriMesh mesh = test::generic_sphere(2);
    const EdgeGraph graph(mesh);

    const Eigen::VectorXd d0 = graph.distances_from(0);
    CHECK(d0[0] == 0.0);
    for (const auto& [p, q] : edges(mesh)) {
        if (p != 0) continue;
        const double length = (mesh.vertices().row(p) - mesh.vertices().row(q)).norm();
        CHECK(d0[q] == doctest::Approx(length).epsilon(1e-14));
    }

    // Symmetry and triangle inequality on sampled triples.
    std::vector<Eigen::VectorXd> rows;
    for (int s = 0; s < mesh.num_vertices(); s += 7) rows.push_back(graph.distances_from(s));
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < rows.size(); ++b) {
            const int pb = static_cast<int>(7 * b);
            CHECK(rows[a][pb] == doctest::Approx(rows[b][static_cast<int>(7 * a)]).epsilon(1e-12));
            for (int c = 0; c < mesh.num_vertices(); c += 5)
                CHECK(rows[a][c] <= rows[a][pb] + rows[b][c] + 1e-12);
        }
    }
}

TEST_CASE("icosphere pole-to-antipode geodesic is within 10% of pi")
{
    const TriMesh sphere = make_icosphere(4);
    const auto& V = sphere.vertices();
    int antipode = 0;
    (V * V.row(0).transpose()).minCoeff(&antipode);
    CHECK((V.row(antipode) + V.row(0)).norm() < 1e-12);
    const double d = geodesic_distances(sphere, 0)[antipode];
    CHECK(d >= M_PI * (1 - 1e-9));
    CHECK(d <= 1.1 * M_PI);
}
