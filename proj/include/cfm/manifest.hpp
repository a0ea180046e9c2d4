#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cfm {

/// Shape collection description. Line grammar ('#' starts a comment):
///
///     shape <id> <mesh-path> [basis=<path>] [desc=<path>]
///     pairs all
///     pair <source-id> <target-id> [gt=<path>]
///
/// Relative paths resolve against the manifest's directory. `pairs all`
/// selects every ordered pair; `pair` lines then only attach ground truth.
struct Manifest
{
    struct Shape
    {
        std::string id;
        std::filesystem::path mesh;
        std::optional<std::filesystem::path> basis;
        std::optional<std::filesystem::path> descriptors;
    };
    struct Pair
    {
        int source = 0;
        int target = 0;
        std::optional<std::filesystem::path> ground_truth;
    };

    std::vector<Shape> shapes;
    bool all_pairs = false;
    std::vector<Pair> pairs;

    int index_of(const std::string& id) const;
    /// Ordered pairs to process: all of them under `pairs all`, else the listed ones.
    std::vector<std::pair<int, int>> selected_pairs() const;
    std::optional<std::filesystem::path> ground_truth(int source, int target) const;
};

Manifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);
/// Paths are written as given (callers pass paths relative to the file).
void write_manifest(std::ostream& out, const Manifest& manifest);

} // namespace cfm
