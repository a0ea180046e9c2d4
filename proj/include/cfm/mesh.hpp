#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace cfm {

using Vertices = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Triangles = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// Validated, immutable triangle mesh. Construction rejects out-of-range
/// indices, zero-area triangles, non-manifold edges and disconnected input.
class TriMesh
{
public:
    TriMesh() = default;
    TriMesh(Vertices vertices, Triangles triangles, std::string name = {});

    const Vertices& vertices() const { return m_vertices; }
    const Triangles& triangles() const { return m_triangles; }
    const std::string& name() const { return m_name; }

    int num_vertices() const { return static_cast<int>(m_vertices.rows()); }
    int num_triangles() const { return static_cast<int>(m_triangles.rows()); }

    /// Same connectivity, new positions. Revalidates.
    TriMesh with_vertices(Vertices vertices) const;
    TriMesh renamed(std::string name) const;

private:
    Vertices m_vertices;
    Triangles m_triangles;
    std::string m_name;
};

TriMesh read_off(std::istream& in, const std::string& name = {});
TriMesh read_obj(std::istream& in, const std::string& name = {});
/// Dispatches on extension (.off / .obj). The mesh name is the file stem.
TriMesh load_mesh(const std::filesystem::path& path);
void write_obj(std::ostream& out, const TriMesh& mesh);
void write_obj(const std::filesystem::path& path, const TriMesh& mesh);

Eigen::VectorXd triangle_areas(const TriMesh& mesh);
double surface_area(const TriMesh& mesh);
int euler_characteristic(const TriMesh& mesh);

/// Uniformly rescaled copy with total area 1.
TriMesh normalize_area(const TriMesh& mesh);

/// Barycentric lumped areas: a third of every incident triangle.
Eigen::VectorXd vertex_areas(const TriMesh& mesh);

/// Mean length of the edges incident to each vertex.
Eigen::VectorXd mean_incident_edge_length(const TriMesh& mesh);

/// Unique undirected edges (i < j), sorted.
std::vector<std::pair<int, int>> edges(const TriMesh& mesh);

enum class SampleMethod { FPS };

struct SampleSet
{
    std::vector<int> indices;
    SampleMethod method = SampleMethod::FPS;
    std::uint64_t seed = 0;
};

/// Greedy farthest point sampling in the Euclidean metric, starting at
/// vertex (seed mod n). Ties go to the smallest index.
SampleSet farthest_point_sample(const TriMesh& mesh, int count, std::uint64_t seed);

/// Edge graph with Euclidean edge lengths, reusable across Dijkstra runs.
class EdgeGraph
{
public:
    explicit EdgeGraph(const TriMesh& mesh);

    Eigen::VectorXd distances_from(int source) const;
    int num_vertices() const { return static_cast<int>(m_offsets.size()) - 1; }

private:
    std::vector<int> m_offsets;
    std::vector<int> m_neighbors;
    std::vector<double> m_lengths;
};

Eigen::VectorXd geodesic_distances(const TriMesh& mesh, int source);

} // namespace cfm
