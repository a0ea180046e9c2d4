#pragma once

#include <cfm/eval.hpp>
#include <cfm/mesh.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cfm {

/// Unit-radius icosphere by repeated midpoint subdivision (subdiv in [0, 6]).
TriMesh make_icosphere(int subdiv);

enum class DeformKind { AnisotropicScale, RadialBumps, VertexPermutation, RigidMotion };

struct DeformSpec
{
    DeformKind kind = DeformKind::RadialBumps;
    double magnitude = 0.0;
    std::uint64_t seed = 0;
};

/// Deformed copy with the same connectivity and the map from input vertices
/// to output vertices (identity except for VertexPermutation).
std::pair<TriMesh, GroundTruth> deform(const TriMesh& mesh, const DeformSpec& spec);

/// Ground truth i → j from the maps base → i and base → j.
GroundTruth compose_ground_truth(const GroundTruth& base_to_i, const GroundTruth& base_to_j);

struct SynthShape
{
    TriMesh mesh;             // area-normalized, named by id
    GroundTruth from_base;    // base icosphere vertex → vertex of this shape
};

/// Six unit-area shapes sharing the connectivity of a subdivided icosphere:
/// a faintly bumped sphere ("sphere"), two bump fields and two anisotropic
/// scalings (0.3 and 0.5) of it, and a permuted copy of the first bump shape.
std::vector<SynthShape> default_collection(int subdiv = 3, std::uint64_t seed = 1);

} // namespace cfm
