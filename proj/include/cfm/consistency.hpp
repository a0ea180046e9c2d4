#pragma once

#include <cfm/mesh.hpp>
#include <cfm/types.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace cfm {

using PairKey = std::pair<int, int>;
using FunctionalMapSet = std::map<PairKey, FunctionalMap>;
using PointMapSet = std::map<PairKey, PointMap>;

/// Triples (i, j, l) of pairwise distinct shape indices.
struct TripletSample
{
    std::vector<std::array<int, 3>> triplets;
    int count = 0;
    std::uint64_t seed = 0;
};

/// `count` uniform triples, drawn with replacement across triples. With
/// `unique`, repeated triples are rejected (count must not exceed n(n−1)(n−2)).
TripletSample sample_triplets(int n_shapes, int count, std::uint64_t seed, bool unique = false);

/// ‖C_li C_jl C_ij − I‖²_F / k for one triple.
double spectral_cycle_residual(const FunctionalMapSet& maps, const std::array<int, 3>& t);
/// Mean of the above over the sample.
double spectral_cycle_residual(const FunctionalMapSet& maps, const TripletSample& sample);

/// ‖C_li C_jl C_ij A_i − A_i‖_F / ‖A_i‖_F for one triple.
double functional_cycle_residual_on_A(const FunctionalMapSet& maps, const std::vector<CoeffMatrix>& coeffs,
                                      const std::array<int, 3>& t);
double functional_cycle_residual_on_A(const FunctionalMapSet& maps, const std::vector<CoeffMatrix>& coeffs,
                                      const TripletSample& sample);

enum class DeviationMetric { Euclidean, Geodesic };

/// Mean over triples and source vertices of the distance between p and
/// T_li(T_jl(T_ij(p))). Maps must run i → j (forward extraction).
double spatial_cycle_deviation(const PointMapSet& maps, const std::vector<TriMesh>& meshes,
                               const TripletSample& sample, DeviationMetric metric = DeviationMetric::Euclidean);

} // namespace cfm
