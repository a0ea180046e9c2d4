#pragma once

#include <cfm/mesh.hpp>
#include <cfm/synth.hpp>

#include <Eigen/Core>

#include <cmath>
#include <random>

namespace cfm::test {

/// Regular tetrahedron with unit edges.
inline TriMesh unit_tetrahedron()
{
    Vertices V(4, 3);
    const double h = std::sqrt(2.0 / 3.0);
    V << 0, 0, 0, 1, 0, 0, 0.5, std::sqrt(3.0) / 2, 0, 0.5, std::sqrt(3.0) / 6, h;
    Triangles F(4, 3);
    F << 0, 2, 1, 0, 1, 3, 1, 2, 3, 2, 0, 3;
    return TriMesh(V, F, "tet");
}

/// Flat hexagon of six equilateral unit triangles around vertex 0.
inline TriMesh equilateral_fan()
{
    Vertices V(7, 3);
    V.row(0) << 0, 0, 0;
    for (int i = 0; i < 6; ++i) V.row(i + 1) << std::cos(M_PI / 3 * i), std::sin(M_PI / 3 * i), 0;
    Triangles F(6, 3);
    for (int i = 0; i < 6; ++i) F.row(i) << 0, i + 1, (i + 1) % 6 + 1;
    return TriMesh(V, F, "fan");
}

/// Icosphere with a bump field: generic (no symmetry), unit area.
inline TriMesh generic_sphere(int subdiv = 2, std::uint64_t seed = 3, double magnitude = 0.25)
{
    return normalize_area(deform(make_icosphere(subdiv), {DeformKind::RadialBumps, magnitude, seed}).first)
        .renamed("generic");
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
    return m;
}

/// Random orthogonal matrix (QR of a Gaussian matrix).
Eigen::MatrixXd random_orthogonal(Eigen::Index n, std::uint64_t seed);

} // namespace cfm::test
