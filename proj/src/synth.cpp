#include <cfm/error.hpp>
#include <cfm/synth.hpp>

#include <Eigen/Geometry>

#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace cfm {

namespace {

constexpr double kLobeWidth = 0.6;
constexpr double kBaseBump = 0.08;

Eigen::MatrixX3d face_normals(const Vertices& V, const Triangles& F)
{
    Eigen::MatrixX3d N(F.rows(), 3);
    for (Eigen::Index t = 0; t < F.rows(); ++t) {
        const Eigen::Vector3d a = V.row(F(t, 0)).transpose();
        const Eigen::Vector3d b = V.row(F(t, 1)).transpose();
        const Eigen::Vector3d c = V.row(F(t, 2)).transpose();
        N.row(t) = (b - a).cross(c - a).transpose();
    }
    return N;
}

Vertices vertex_normals(const Vertices& V, const Triangles& F)
{
    const Eigen::MatrixX3d faces = face_normals(V, F);
    Vertices N = Vertices::Zero(V.rows(), 3);
    for (Eigen::Index t = 0; t < F.rows(); ++t)
        for (int c = 0; c < 3; ++c) N.row(F(t, c)) += faces.row(t);
    for (Eigen::Index v = 0; v < N.rows(); ++v) N.row(v).normalize();
    return N;
}

Eigen::Vector3d random_direction(std::mt19937_64& rng)
{
    std::normal_distribution<double> normal;
    Eigen::Vector3d d;
    do {
        d = {normal(rng), normal(rng), normal(rng)};
    } while (d.norm() < 1e-8);
    return d.normalized();
}

void check_orientation(const TriMesh& before, const Vertices& after)
{
    const Eigen::MatrixX3d n0 = face_normals(before.vertices(), before.triangles());
    const Eigen::MatrixX3d n1 = face_normals(after, before.triangles());
    for (Eigen::Index t = 0; t < n0.rows(); ++t) {
        if (!(n0.row(t).dot(n1.row(t)) > 0.0))
            fail(Errc::triangle_flip, "triangle " + std::to_string(t) + " flips; lower the deformation magnitude");
    }
}

GroundTruth identity_truth(int n)
{
    GroundTruth gt;
    gt.assignment.resize(static_cast<std::size_t>(n));
    std::iota(gt.assignment.begin(), gt.assignment.end(), 0);
    return gt;
}

} // namespace

TriMesh make_icosphere(int subdiv)
{
    require(subdiv >= 0 && subdiv <= 6, Errc::invalid_argument,
            "icosphere subdivision must be in [0, 6], got " + std::to_string(subdiv));
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> pts = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                                        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& p : pts) p.normalize();
    std::vector<std::array<int, 3>> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

    for (int level = 0; level < subdiv; ++level) {
        std::map<std::pair<int, int>, int> midpoint;
        auto split = [&](int a, int b) {
            const std::pair<int, int> key = std::minmax(a, b);
            const auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            pts.push_back((pts[static_cast<std::size_t>(a)] + pts[static_cast<std::size_t>(b)]).normalized());
            const int id = static_cast<int>(pts.size()) - 1;
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const int ab = split(f[0], f[1]);
            const int bc = split(f[1], f[2]);
            const int ca = split(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    Vertices V(static_cast<Eigen::Index>(pts.size()), 3);
    for (std::size_t v = 0; v < pts.size(); ++v) V.row(static_cast<Eigen::Index>(v)) = pts[v].transpose();
    Triangles F(static_cast<Eigen::Index>(faces.size()), 3);
    for (std::size_t f = 0; f < faces.size(); ++f)
        F.row(static_cast<Eigen::Index>(f)) << faces[f][0], faces[f][1], faces[f][2];
    return TriMesh(std::move(V), std::move(F), "icosphere" + std::to_string(subdiv));
}

std::pair<TriMesh, GroundTruth> deform(const TriMesh& mesh, const DeformSpec& spec)
{
    require(std::isfinite(spec.magnitude) && spec.magnitude >= 0.0, Errc::invalid_argument,
            "deformation magnitude must be finite and nonnegative");
    const int n = mesh.num_vertices();
    const double m = spec.magnitude;
    std::mt19937_64 rng(spec.seed);
    Vertices V = mesh.vertices();

    switch (spec.kind) {
    case DeformKind::AnisotropicScale: {
        V.col(0) *= 1.0 + m;
        V.col(2) /= 1.0 + m;
        break;
    }
    case DeformKind::RadialBumps: {
        const Vertices normals = vertex_normals(mesh.vertices(), mesh.triangles());
        const Eigen::RowVector3d centroid = mesh.vertices().colwise().mean();
        std::array<Eigen::Vector3d, 3> lobes;
        for (auto& lobe : lobes) lobe = random_direction(rng);
        for (int v = 0; v < n; ++v) {
            const Eigen::Vector3d dir = (mesh.vertices().row(v) - centroid).transpose().normalized();
            double height = 0.0;
            for (const auto& lobe : lobes) {
                const double angle = std::acos(std::clamp(dir.dot(lobe), -1.0, 1.0));
                height += std::exp(-angle * angle / (2.0 * kLobeWidth * kLobeWidth));
            }
            V.row(v) += m * height * normals.row(v);
        }
        break;
    }
    case DeformKind::RigidMotion: {
        const Eigen::Vector3d axis = random_direction(rng);
        const Eigen::Vector3d shift = random_direction(rng) * m;
        const Eigen::Matrix3d R = Eigen::AngleAxisd(m, axis).toRotationMatrix();
        for (int v = 0; v < n; ++v) V.row(v) = (R * V.row(v).transpose() + shift).transpose();
        break;
    }
    case DeformKind::VertexPermutation: {
        GroundTruth gt = identity_truth(n);
        if (m > 0.0)
            for (int s = n - 1; s > 0; --s)
                std::swap(gt.assignment[static_cast<std::size_t>(s)], gt.assignment[rng() % (s + 1)]);
        Vertices P(n, 3);
        for (int p = 0; p < n; ++p) P.row(gt.assignment[static_cast<std::size_t>(p)]) = V.row(p);
        Triangles F = mesh.triangles();
        for (Eigen::Index t = 0; t < F.rows(); ++t)
            for (int c = 0; c < 3; ++c) F(t, c) = gt.assignment[static_cast<std::size_t>(F(t, c))];
        return {TriMesh(std::move(P), std::move(F), mesh.name()), std::move(gt)};
    }
    }

    check_orientation(mesh, V);
    return {mesh.with_vertices(std::move(V)), identity_truth(n)};
}

GroundTruth compose_ground_truth(const GroundTruth& base_to_i, const GroundTruth& base_to_j)
{
    const std::size_t n = base_to_i.assignment.size();
    require(base_to_j.assignment.size() == n, Errc::dimension_mismatch, "ground truths disagree on the base size");
    std::vector<int> inverse(n, -1);
    for (std::size_t b = 0; b < n; ++b) {
        const int v = base_to_i.assignment[b];
        require(v >= 0 && static_cast<std::size_t>(v) < n && inverse[static_cast<std::size_t>(v)] < 0,
                Errc::invalid_argument, "ground truth is not a bijection");
        inverse[static_cast<std::size_t>(v)] = static_cast<int>(b);
    }
    GroundTruth out;
    out.assignment.resize(n);
    for (std::size_t v = 0; v < n; ++v)
        out.assignment[v] = base_to_j.assignment[static_cast<std::size_t>(inverse[v])];
    return out;
}

std::vector<SynthShape> default_collection(int subdiv, std::uint64_t seed)
{
    // A faint bump field removes the icosahedral and mirror symmetries, which
    // would otherwise hide every odd eigenfunction from the descriptors.
    const TriMesh base = deform(make_icosphere(subdiv), {DeformKind::RadialBumps, kBaseBump, seed + 10}).first;
    const GroundTruth identity = identity_truth(base.num_vertices());
    std::vector<SynthShape> out;
    auto add = [&](const std::string& id, std::pair<TriMesh, GroundTruth> made) {
        out.push_back({normalize_area(made.first).renamed(id), std::move(made.second)});
    };
    add("sphere", {base, identity});
    add("bumps_a", deform(base, {DeformKind::RadialBumps, 0.3, seed}));
    add("bumps_b", deform(base, {DeformKind::RadialBumps, 0.3, seed + 1}));
    add("aniso_03", deform(base, {DeformKind::AnisotropicScale, 0.3, seed}));
    add("aniso_05", deform(base, {DeformKind::AnisotropicScale, 0.5, seed}));
    auto permuted = deform(out[1].mesh, {DeformKind::VertexPermutation, 1.0, seed + 2});
    // bumps_a carries the identity from the base, so the permutation is the whole map.
    add("bumps_a_perm", std::move(permuted));
    return out;
}

} // namespace cfm
