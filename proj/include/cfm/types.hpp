#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace cfm {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Spectrally projected descriptors A = Φᵀ M G (k × d). Also read as the
/// functional map from the latent shape to `shape_id`.
struct CoeffMatrix
{
    Eigen::MatrixXd values;
    std::string shape_id;

    Eigen::Index k() const { return values.rows(); }
    Eigen::Index d() const { return values.cols(); }
};

/// k × k functional map with the convention C A_source ≈ A_target.
struct FunctionalMap
{
    Eigen::MatrixXd values;
    std::string source_id;
    std::string target_id;

    Eigen::Index k() const { return values.rows(); }
};

/// Hard vertex correspondence: assignment[v] is a vertex of the `to` shape.
struct PointMap
{
    std::vector<int> assignment;
    int n_to = 0;
    std::string from_id;
    std::string to_id;

    int n_from() const { return static_cast<int>(assignment.size()); }
};

} // namespace cfm
