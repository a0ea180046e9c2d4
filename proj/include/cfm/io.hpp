#pragma once

#include <cfm/eval.hpp>
#include <cfm/optim.hpp>
#include <cfm/spectral.hpp>
#include <cfm/types.hpp>

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace cfm {

// Binary formats are little-endian regardless of host order; f64 payloads
// round-trip bit for bit.

/// "FMAT", u32 rows, u32 cols, f64 row-major.
void write_matrix(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(std::istream& in);

/// "SPEC", u32 version, u32 n, u32 k, then λ, diag(M), Φ row-major.
void write_basis(std::ostream& out, const SpectralBasis& basis);
SpectralBasis read_basis(std::istream& in);

/// "FMAP", u32 k, u32-length-prefixed source and target ids, f64 row-major.
void write_fmap(std::ostream& out, const FunctionalMap& map);
FunctionalMap read_fmap(std::istream& in);

/// "# pointmap <n_from> <n_to> <from_id> <to_id>" then one index per line.
void write_pointmap(std::ostream& out, const PointMap& map);
PointMap read_pointmap(std::istream& in);
GroundTruth to_ground_truth(const PointMap& map);

/// "SSCM", u32 version, u32 mode (0 shared, 1 direct), u32 k, u32 block count,
/// then per block u32 rows, u32 cols, f64 column-major.
void write_checkpoint(std::ostream& out, const FeatureModel& model);
FeatureModel read_checkpoint(std::istream& in);

/// One CSV row per step, numbers in fixed 6-decimal notation.
void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& history);

/// File wrappers; failures to open report io_error with the path.
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);
SpectralBasis load_basis(const std::filesystem::path& path);
FunctionalMap load_fmap(const std::filesystem::path& path);
PointMap load_pointmap(const std::filesystem::path& path);
FeatureModel load_checkpoint(const std::filesystem::path& path);

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);
void save_basis(const std::filesystem::path& path, const SpectralBasis& basis);
void save_fmap(const std::filesystem::path& path, const FunctionalMap& map);
void save_pointmap(const std::filesystem::path& path, const PointMap& map);
void save_checkpoint(const std::filesystem::path& path, const FeatureModel& model);
void save_history_csv(const std::filesystem::path& path, const std::vector<HistoryRow>& history);

} // namespace cfm
