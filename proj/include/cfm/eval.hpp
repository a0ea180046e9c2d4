#pragma once

#include <cfm/mesh.hpp>
#include <cfm/types.hpp>

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace cfm {

/// Reference correspondence laid out like a PointMap. Masked-out vertices
/// (mask[v] == false) carry no annotation.
struct GroundTruth
{
    std::vector<int> assignment;
    std::optional<std::vector<bool>> mask;
};

struct GeodesicError
{
    double mean_x100 = 0.0;
    Eigen::VectorXd per_vertex; // NaN where masked
};

/// Graph-geodesic distance between predicted and reference targets on a
/// unit-area target mesh, averaged over annotated vertices and scaled by 100.
GeodesicError geodesic_error(const PointMap& pred, const GroundTruth& gt, const TriMesh& target);

/// Fraction of (non-NaN) errors at or below each threshold.
std::vector<double> accuracy_curve(const Eigen::VectorXd& errors, const std::vector<double>& thresholds);

} // namespace cfm
