#include <cfm/error.hpp>
#include <cfm/mesh.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

namespace cfm {

namespace {

// Union-find with path halving.
struct DisjointSets
{
    std::vector<int> parent;
    explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x)
    {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

double triangle_area(const Vertices& V, int a, int b, int c)
{
    const Eigen::Vector3d e1 = V.row(b) - V.row(a);
    const Eigen::Vector3d e2 = V.row(c) - V.row(a);
    return 0.5 * e1.cross(e2).norm();
}

void validate(const Vertices& V, const Triangles& F, const std::string& name)
{
    const int n = static_cast<int>(V.rows());
    const std::string who = name.empty() ? std::string("mesh") : "mesh '" + name + "'";
    require(n > 0 && F.rows() > 0, Errc::parse_error, who + " has no vertices or no triangles");
    require(V.allFinite(), Errc::parse_error, who + " has non-finite vertex coordinates");

    for (Eigen::Index t = 0; t < F.rows(); ++t) {
        for (int c = 0; c < 3; ++c) {
            const int v = F(t, c);
            if (v < 0 || v >= n) {
                fail(Errc::index_out_of_range, who + ": triangle " + std::to_string(t) + " references vertex " +
                                                   std::to_string(v) + " but there are " + std::to_string(n) +
                                                   " vertices");
            }
        }
    }

    for (Eigen::Index t = 0; t < F.rows(); ++t) {
        const int a = F(t, 0), b = F(t, 1), c = F(t, 2);
        const double longest = std::max({(V.row(a) - V.row(b)).squaredNorm(), (V.row(b) - V.row(c)).squaredNorm(),
                                         (V.row(c) - V.row(a)).squaredNorm()});
        if (a == b || b == c || c == a || triangle_area(V, a, b, c) <= 1e-14 * longest) {
            fail(Errc::degenerate_triangle, who + ": triangle " + std::to_string(t) + " has zero area");
        }
    }

    std::map<std::pair<int, int>, int> edge_count;
    for (Eigen::Index t = 0; t < F.rows(); ++t) {
        for (int c = 0; c < 3; ++c) {
            const int a = F(t, c), b = F(t, (c + 1) % 3);
            const int count = ++edge_count[{std::min(a, b), std::max(a, b)}];
            if (count > 2) {
                fail(Errc::non_manifold, who + ": edge (" + std::to_string(std::min(a, b)) + ", " +
                                             std::to_string(std::max(a, b)) + ") is shared by more than two triangles");
            }
        }
    }

    DisjointSets sets(n);
    std::vector<bool> referenced(static_cast<std::size_t>(n), false);
    for (Eigen::Index t = 0; t < F.rows(); ++t) {
        for (int c = 0; c < 3; ++c) referenced[F(t, c)] = true;
        sets.unite(F(t, 0), F(t, 1));
        sets.unite(F(t, 1), F(t, 2));
    }
    const int root = sets.find(0);
    for (int v = 0; v < n; ++v) {
        if (!referenced[v]) fail(Errc::disconnected, who + ": vertex " + std::to_string(v) + " is isolated");
        if (sets.find(v) != root) {
            fail(Errc::disconnected, who + ": vertex " + std::to_string(v) + " is not connected to vertex 0");
        }
    }
}

std::string strip_comment(const std::string& line)
{
    const auto hash = line.find('#');
    return hash == std::string::npos ? line : line.substr(0, hash);
}

bool is_blank(const std::string& s)
{
    return std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); });
}

} // namespace

TriMesh::TriMesh(Vertices vertices, Triangles triangles, std::string name)
    : m_vertices(std::move(vertices))
    , m_triangles(std::move(triangles))
    , m_name(std::move(name))
{
    validate(m_vertices, m_triangles, m_name);
}

TriMesh TriMesh::with_vertices(Vertices vertices) const
{
    require(vertices.rows() == m_vertices.rows(), Errc::dimension_mismatch, "vertex count changed");
    return TriMesh(std::move(vertices), m_triangles, m_name);
}

TriMesh TriMesh::renamed(std::string name) const
{
    TriMesh copy = *this;
    copy.m_name = std::move(name);
    return copy;
}

TriMesh read_off(std::istream& in, const std::string& name)
{
    std::string line;
    std::vector<std::string> content;
    while (std::getline(in, line)) {
        line = strip_comment(line);
        if (!is_blank(line)) content.push_back(line);
    }
    require(!content.empty(), Errc::parse_error, "empty OFF file");

    std::istringstream header(content[0]);
    std::string magic;
    header >> magic;
    require(magic == "OFF", Errc::parse_error, "missing OFF header");
    std::size_t cursor = 1;
    long nv = -1, nf = -1, ne = 0;
    if (!(header >> nv >> nf)) {
        require(cursor < content.size(), Errc::parse_error, "missing OFF counts");
        std::istringstream counts(content[cursor++]);
        require(static_cast<bool>(counts >> nv >> nf), Errc::parse_error, "malformed OFF counts");
        counts >> ne;
    }
    require(nv > 0 && nf > 0, Errc::parse_error, "OFF counts must be positive");
    require(content.size() >= cursor + static_cast<std::size_t>(nv + nf), Errc::parse_error,
            "OFF file ends before all vertices and faces were read");

    Vertices V(nv, 3);
    for (long i = 0; i < nv; ++i) {
        std::istringstream row(content[cursor++]);
        require(static_cast<bool>(row >> V(i, 0) >> V(i, 1) >> V(i, 2)), Errc::parse_error,
                "malformed OFF vertex " + std::to_string(i));
    }
    Triangles F(nf, 3);
    for (long t = 0; t < nf; ++t) {
        std::istringstream row(content[cursor++]);
        int count = 0;
        require(static_cast<bool>(row >> count), Errc::parse_error, "malformed OFF face " + std::to_string(t));
        require(count == 3, Errc::parse_error, "OFF face " + std::to_string(t) + " is not a triangle");
        require(static_cast<bool>(row >> F(t, 0) >> F(t, 1) >> F(t, 2)), Errc::parse_error,
                "malformed OFF face " + std::to_string(t));
    }
    return TriMesh(std::move(V), std::move(F), name);
}

TriMesh read_obj(std::istream& in, const std::string& name)
{
    std::vector<Eigen::Vector3d> positions;
    std::vector<Eigen::Vector3i> faces;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_comment(line);
        std::istringstream row(line);
        std::string tag;
        if (!(row >> tag)) continue;
        if (tag == "v") {
            Eigen::Vector3d p;
            require(static_cast<bool>(row >> p.x() >> p.y() >> p.z()), Errc::parse_error,
                    "malformed OBJ vertex on line " + std::to_string(line_no));
            positions.push_back(p);
        } else if (tag == "f") {
            std::vector<int> corners;
            std::string token;
            while (row >> token) {
                const std::string head = token.substr(0, token.find('/'));
                int index = 0;
                try {
                    index = std::stoi(head);
                } catch (const std::exception&) {
                    fail(Errc::parse_error, "malformed OBJ face index on line " + std::to_string(line_no));
                }
                require(index != 0, Errc::parse_error, "OBJ indices are 1-based; found 0 on line " + std::to_string(line_no));
                corners.push_back(index > 0 ? index - 1 : static_cast<int>(positions.size()) + index);
            }
            require(corners.size() == 3, Errc::parse_error,
                    "OBJ face on line " + std::to_string(line_no) + " is not a triangle");
            faces.emplace_back(corners[0], corners[1], corners[2]);
        }
    }
    Vertices V(static_cast<Eigen::Index>(positions.size()), 3);
    for (std::size_t i = 0; i < positions.size(); ++i) V.row(static_cast<Eigen::Index>(i)) = positions[i].transpose();
    Triangles F(static_cast<Eigen::Index>(faces.size()), 3);
    for (std::size_t t = 0; t < faces.size(); ++t) F.row(static_cast<Eigen::Index>(t)) = faces[t].transpose();
    return TriMesh(std::move(V), std::move(F), name);
}

TriMesh load_mesh(const std::filesystem::path& path)
{
    std::ifstream in(path);
    require(in.good(), Errc::io_error, "cannot open mesh file " + path.string());
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    const std::string name = path.stem().string();
    if (ext == ".off") return read_off(in, name);
    if (ext == ".obj") return read_obj(in, name);
    fail(Errc::parse_error, "unsupported mesh extension '" + ext + "'");
}

void write_obj(std::ostream& out, const TriMesh& mesh)
{
    out << std::setprecision(17);
    if (!mesh.name().empty()) out << "o " << mesh.name() << '\n';
    const auto& V = mesh.vertices();
    for (Eigen::Index i = 0; i < V.rows(); ++i) out << "v " << V(i, 0) << ' ' << V(i, 1) << ' ' << V(i, 2) << '\n';
    const auto& F = mesh.triangles();
    for (Eigen::Index t = 0; t < F.rows(); ++t) {
        out << "f " << F(t, 0) + 1 << ' ' << F(t, 1) + 1 << ' ' << F(t, 2) + 1 << '\n';
    }
}

void write_obj(const std::filesystem::path& path, const TriMesh& mesh)
{
    std::ofstream out(path);
    require(out.good(), Errc::io_error, "cannot write " + path.string());
    write_obj(out, mesh);
    require(out.good(), Errc::io_error, "failed writing " + path.string());
}

Eigen::VectorXd triangle_areas(const TriMesh& mesh)
{
    const auto& F = mesh.triangles();
    Eigen::VectorXd areas(F.rows());
    for (Eigen::Index t = 0; t < F.rows(); ++t) areas[t] = triangle_area(mesh.vertices(), F(t, 0), F(t, 1), F(t, 2));
    return areas;
}

double surface_area(const TriMesh& mesh)
{
    return triangle_areas(mesh).sum();
}

int euler_characteristic(const TriMesh& mesh)
{
    return mesh.num_vertices() - static_cast<int>(edges(mesh).size()) + mesh.num_triangles();
}

TriMesh normalize_area(const TriMesh& mesh)
{
    const double area = surface_area(mesh);
    require(area > 0.0, Errc::zero_area, "cannot normalize a mesh with zero total area");
    const double scale = 1.0 / std::sqrt(area);
    return mesh.with_vertices(mesh.vertices() * scale);
}

Eigen::VectorXd vertex_areas(const TriMesh& mesh)
{
    const Eigen::VectorXd areas = triangle_areas(mesh);
    const auto& F = mesh.triangles();
    Eigen::VectorXd lumped = Eigen::VectorXd::Zero(mesh.num_vertices());
    for (Eigen::Index t = 0; t < F.rows(); ++t) {
        for (int c = 0; c < 3; ++c) lumped[F(t, c)] += areas[t] / 3.0;
    }
    return lumped;
}

Eigen::VectorXd mean_incident_edge_length(const TriMesh& mesh)
{
    Eigen::VectorXd total = Eigen::VectorXd::Zero(mesh.num_vertices());
    Eigen::VectorXd count = Eigen::VectorXd::Zero(mesh.num_vertices());
    for (const auto& [a, b] : edges(mesh)) {
        const double len = (mesh.vertices().row(a) - mesh.vertices().row(b)).norm();
        total[a] += len;
        total[b] += len;
        count[a] += 1.0;
        count[b] += 1.0;
    }
    return total.cwiseQuotient(count);
}

std::vector<std::pair<int, int>> edges(const TriMesh& mesh)
{
    const auto& F = mesh.triangles();
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<std::size_t>(F.rows()) * 3);
    for (Eigen::Index t = 0; t < F.rows(); ++t) {
        for (int c = 0; c < 3; ++c) {
            const int a = F(t, c), b = F(t, (c + 1) % 3);
            out.emplace_back(std::min(a, b), std::max(a, b));
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SampleSet farthest_point_sample(const TriMesh& mesh, int count, std::uint64_t seed)
{
    const int n = mesh.num_vertices();
    require(count >= 1 && count <= n, Errc::invalid_argument,
            "sample count " + std::to_string(count) + " outside [1, " + std::to_string(n) + "]");
    const auto& V = mesh.vertices();

    SampleSet out;
    out.seed = seed;
    out.indices.reserve(static_cast<std::size_t>(count));
    Eigen::VectorXd nearest = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    int current = static_cast<int>(seed % static_cast<std::uint64_t>(n));
    for (int s = 0; s < count; ++s) {
        out.indices.push_back(current);
        nearest[current] = -1.0;
        int best = -1;
        double best_dist = -1.0;
        for (int v = 0; v < n; ++v) {
            if (nearest[v] < 0.0) continue;
            nearest[v] = std::min(nearest[v], (V.row(v) - V.row(current)).squaredNorm());
            if (nearest[v] > best_dist) {
                best_dist = nearest[v];
                best = v;
            }
        }
        current = best;
    }
    return out;
}

EdgeGraph::EdgeGraph(const TriMesh& mesh)
{
    const int n = mesh.num_vertices();
    const auto edge_list = edges(mesh);
    std::vector<int> degree(static_cast<std::size_t>(n), 0);
    for (const auto& [a, b] : edge_list) {
        ++degree[a];
        ++degree[b];
    }
    m_offsets.assign(static_cast<std::size_t>(n) + 1, 0);
    for (int v = 0; v < n; ++v) m_offsets[v + 1] = m_offsets[v] + degree[v];
    m_neighbors.resize(static_cast<std::size_t>(m_offsets[n]));
    m_lengths.resize(m_neighbors.size());
    std::vector<int> fill(m_offsets.begin(), m_offsets.end() - 1);
    const auto& V = mesh.vertices();
    for (const auto& [a, b] : edge_list) {
        const double len = (V.row(a) - V.row(b)).norm();
        m_neighbors[fill[a]] = b;
        m_lengths[fill[a]++] = len;
        m_neighbors[fill[b]] = a;
        m_lengths[fill[b]++] = len;
    }
}

Eigen::VectorXd EdgeGraph::distances_from(int source) const
{
    const int n = num_vertices();
    require(source >= 0 && source < n, Errc::index_out_of_range, "geodesic source " + std::to_string(source));
    Eigen::VectorXd dist = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    dist[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        const auto [d, v] = queue.top();
        queue.pop();
        if (d > dist[v]) continue;
        for (int e = m_offsets[v]; e < m_offsets[v + 1]; ++e) {
            const int w = m_neighbors[e];
            const double candidate = d + m_lengths[e];
            if (candidate < dist[w]) {
                dist[w] = candidate;
                queue.emplace(candidate, w);
            }
        }
    }
    for (int v = 0; v < n; ++v) {
        if (!std::isfinite(dist[v])) {
            fail(Errc::unreachable, "vertex " + std::to_string(v) + " unreachable from " + std::to_string(source));
        }
    }
    return dist;
}

Eigen::VectorXd geodesic_distances(const TriMesh& mesh, int source)
{
    return EdgeGraph(mesh).distances_from(source);
}

} // namespace cfm
