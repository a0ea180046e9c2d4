#include <cfm/error.hpp>
#include <cfm/manifest.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace cfm {

int Manifest::index_of(const std::string& id) const
{
    for (std::size_t s = 0; s < shapes.size(); ++s)
        if (shapes[s].id == id) return static_cast<int>(s);
    fail(Errc::missing_data, "manifest has no shape '" + id + "'");
}

std::vector<std::pair<int, int>> Manifest::selected_pairs() const
{
    std::vector<std::pair<int, int>> out;
    if (all_pairs) {
        const int n = static_cast<int>(shapes.size());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) out.emplace_back(i, j);
        return out;
    }
    for (const auto& p : pairs) out.emplace_back(p.source, p.target);
    return out;
}

std::optional<std::filesystem::path> Manifest::ground_truth(int source, int target) const
{
    for (const auto& p : pairs)
        if (p.source == source && p.target == target) return p.ground_truth;
    return std::nullopt;
}

Manifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir)
{
    Manifest m;
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    std::set<std::string> ids;
    std::set<std::pair<int, int>> seen_pairs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto where = " (manifest line " + std::to_string(line_no) + ")";
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream tokens(line);
        std::string keyword;
        if (!(tokens >> keyword)) continue;
        std::vector<std::string> args;
        for (std::string t; tokens >> t;) args.push_back(t);

        auto options = [&](std::size_t first, std::initializer_list<const char*> allowed) {
            std::vector<std::pair<std::string, std::string>> out;
            for (std::size_t a = first; a < args.size(); ++a) {
                const auto eq = args[a].find('=');
                if (eq == std::string::npos) fail(Errc::parse_error, "unexpected token '" + args[a] + "'" + where);
                std::string key = args[a].substr(0, eq);
                bool known = false;
                for (const char* k : allowed) known = known || key == k;
                if (!known) fail(Errc::parse_error, "unknown option '" + key + "'" + where);
                out.emplace_back(std::move(key), args[a].substr(eq + 1));
            }
            return out;
        };

        if (keyword == "shape") {
            if (args.size() < 2) fail(Errc::parse_error, "shape needs an id and a mesh path" + where);
            if (!ids.insert(args[0]).second) fail(Errc::parse_error, "duplicate shape id '" + args[0] + "'" + where);
            Manifest::Shape shape{args[0], resolve(args[1]), std::nullopt, std::nullopt};
            for (const auto& [key, value] : options(2, {"basis", "desc"})) {
                (key == "basis" ? shape.basis : shape.descriptors) = resolve(value);
            }
            m.shapes.push_back(std::move(shape));
        } else if (keyword == "pairs") {
            if (args.size() != 1 || args[0] != "all") fail(Errc::parse_error, "expected 'pairs all'" + where);
            m.all_pairs = true;
        } else if (keyword == "pair") {
            if (args.size() < 2) fail(Errc::parse_error, "pair needs source and target ids" + where);
            Manifest::Pair pair{m.index_of(args[0]), m.index_of(args[1]), std::nullopt};
            if (pair.source == pair.target) fail(Errc::parse_error, "pair of a shape with itself" + where);
            if (!seen_pairs.insert({pair.source, pair.target}).second)
                fail(Errc::parse_error, "duplicate pair" + where);
            for (const auto& [key, value] : options(2, {"gt"})) pair.ground_truth = resolve(value);
            m.pairs.push_back(std::move(pair));
        } else {
            fail(Errc::parse_error, "unknown keyword '" + keyword + "'" + where);
        }
    }
    require(!m.shapes.empty(), Errc::parse_error, "manifest lists no shapes");
    return m;
}

Manifest load_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) fail(Errc::io_error, "cannot open " + path.string());
    return parse_manifest(in, path.parent_path());
}

void write_manifest(std::ostream& out, const Manifest& manifest)
{
    for (const auto& s : manifest.shapes) {
        out << "shape " << s.id << ' ' << s.mesh.generic_string();
        if (s.basis) out << " basis=" << s.basis->generic_string();
        if (s.descriptors) out << " desc=" << s.descriptors->generic_string();
        out << '\n';
    }
    if (manifest.all_pairs) out << "pairs all\n";
    for (const auto& p : manifest.pairs) {
        out << "pair " << manifest.shapes[static_cast<std::size_t>(p.source)].id << ' '
            << manifest.shapes[static_cast<std::size_t>(p.target)].id;
        if (p.ground_truth) out << " gt=" << p.ground_truth->generic_string();
        out << '\n';
    }
}

} // namespace cfm
