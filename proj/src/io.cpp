#include <cfm/error.hpp>
#include <cfm/io.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace cfm {

namespace {

constexpr std::uint32_t kBasisVersion = 1;
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v)
{
    char bytes[4];
    for (int b = 0; b < 4; ++b) bytes[b] = static_cast<char>((v >> (8 * b)) & 0xffu);
    out.write(bytes, 4);
}

void put_f64(std::ostream& out, double v)
{
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    out.write(bytes, 8);
}

void take(std::istream& in, char* dst, std::size_t count, const char* what)
{
    in.read(dst, static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count)
        fail(Errc::truncated, std::string("file ends inside the ") + what);
}

std::uint32_t get_u32(std::istream& in, const char* what)
{
    unsigned char bytes[4];
    take(in, reinterpret_cast<char*>(bytes), 4, what);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[b]) << (8 * b);
    return v;
}

double get_f64(std::istream& in, const char* what)
{
    unsigned char bytes[8];
    take(in, reinterpret_cast<char*>(bytes), 8, what);
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    return std::bit_cast<double>(bits);
}

void put_magic(std::ostream& out, const char (&magic)[5]) { out.write(magic, 4); }

void expect_magic(std::istream& in, const char (&magic)[5])
{
    char got[4] = {};
    in.read(got, 4);
    if (in.gcount() != 4 || std::memcmp(got, magic, 4) != 0)
        fail(Errc::bad_magic, std::string("expected a ") + magic + " file");
}

void put_string(std::ostream& out, const std::string& s)
{
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in, const char* what)
{
    const std::uint32_t length = get_u32(in, what);
    std::string s(length, '\0');
    if (length > 0) take(in, s.data(), length, what);
    return s;
}

std::uint32_t checked_u32(Eigen::Index v, const char* what)
{
    require(v >= 0 && v <= std::numeric_limits<std::uint32_t>::max(), Errc::invalid_argument,
            std::string(what) + " does not fit the file format");
    return static_cast<std::uint32_t>(v);
}

void put_row_major(std::ostream& out, const Eigen::MatrixXd& m)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
}

Eigen::MatrixXd get_row_major(std::istream& in, Eigen::Index rows, Eigen::Index cols, const char* what)
{
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = get_f64(in, what);
    return m;
}

void expect_end(std::istream& in, const char* what)
{
    if (in.peek() != std::char_traits<char>::eof())
        fail(Errc::parse_error, std::string("trailing bytes after the ") + what);
}

void check_stream(const std::ostream& out, const char* what)
{
    if (!out) fail(Errc::io_error, std::string("failed writing ") + what);
}

std::ifstream open_in(const std::filesystem::path& path, bool binary)
{
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) fail(Errc::io_error, "cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary)
{
    std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot write " + path.string());
    return out;
}

} // namespace

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m)
{
    put_magic(out, "FMAT");
    put_u32(out, checked_u32(m.rows(), "row count"));
    put_u32(out, checked_u32(m.cols(), "column count"));
    put_row_major(out, m);
    check_stream(out, "matrix");
}

Eigen::MatrixXd read_matrix(std::istream& in)
{
    expect_magic(in, "FMAT");
    const std::uint32_t rows = get_u32(in, "matrix header");
    const std::uint32_t cols = get_u32(in, "matrix header");
    Eigen::MatrixXd m = get_row_major(in, rows, cols, "matrix payload");
    expect_end(in, "matrix payload");
    return m;
}

void write_basis(std::ostream& out, const SpectralBasis& basis)
{
    require(basis.lambda.size() == basis.k() && basis.mass.size() == basis.n(), Errc::dimension_mismatch,
            "inconsistent basis");
    put_magic(out, "SPEC");
    put_u32(out, kBasisVersion);
    put_u32(out, checked_u32(basis.n(), "vertex count"));
    put_u32(out, checked_u32(basis.k(), "basis size"));
    for (Eigen::Index i = 0; i < basis.lambda.size(); ++i) put_f64(out, basis.lambda[i]);
    for (Eigen::Index i = 0; i < basis.mass.size(); ++i) put_f64(out, basis.mass[i]);
    put_row_major(out, basis.phi);
    check_stream(out, "basis");
}

SpectralBasis read_basis(std::istream& in)
{
    expect_magic(in, "SPEC");
    const std::uint32_t version = get_u32(in, "basis header");
    if (version != kBasisVersion)
        fail(Errc::version_mismatch, "basis file version " + std::to_string(version) + ", expected " +
                                         std::to_string(kBasisVersion));
    const std::uint32_t n = get_u32(in, "basis header");
    const std::uint32_t k = get_u32(in, "basis header");
    SpectralBasis basis;
    basis.lambda.resize(k);
    for (std::uint32_t i = 0; i < k; ++i) basis.lambda[i] = get_f64(in, "eigenvalues");
    basis.mass.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) basis.mass[i] = get_f64(in, "mass diagonal");
    basis.phi = get_row_major(in, n, k, "eigenvectors");
    expect_end(in, "eigenvectors");
    return basis;
}

void write_fmap(std::ostream& out, const FunctionalMap& map)
{
    require(map.values.rows() == map.values.cols(), Errc::dimension_mismatch, "functional map must be square");
    put_magic(out, "FMAP");
    put_u32(out, checked_u32(map.k(), "map size"));
    put_string(out, map.source_id);
    put_string(out, map.target_id);
    put_row_major(out, map.values);
    check_stream(out, "functional map");
}

FunctionalMap read_fmap(std::istream& in)
{
    expect_magic(in, "FMAP");
    const std::uint32_t k = get_u32(in, "map header");
    FunctionalMap map;
    map.source_id = get_string(in, "source id");
    map.target_id = get_string(in, "target id");
    map.values = get_row_major(in, k, k, "map payload");
    expect_end(in, "map payload");
    return map;
}

void write_pointmap(std::ostream& out, const PointMap& map)
{
    require(!map.assignment.empty(), Errc::invalid_argument, "point map is empty");
    auto id = [](const std::string& s) { return s.empty() ? std::string("-") : s; };
    out << "# pointmap " << map.n_from() << ' ' << map.n_to << ' ' << id(map.from_id) << ' ' << id(map.to_id)
        << '\n';
    for (int v : map.assignment) out << v << '\n';
    check_stream(out, "point map");
}

PointMap read_pointmap(std::istream& in)
{
    std::string header;
    if (!std::getline(in, header)) fail(Errc::truncated, "point map file is empty");
    std::istringstream head(header);
    std::string hash, tag;
    long long n_from = -1, n_to = -1;
    PointMap map;
    head >> hash >> tag;
    if (hash != "#" || tag != "pointmap") fail(Errc::bad_magic, "expected a '# pointmap' header");
    if (!(head >> n_from >> n_to >> map.from_id >> map.to_id))
        fail(Errc::parse_error, "malformed point map header");
    if (map.from_id == "-") map.from_id.clear();
    if (map.to_id == "-") map.to_id.clear();
    require(n_from > 0, Errc::invalid_argument, "point map is empty");
    require(n_to > 0 && n_to <= std::numeric_limits<int>::max(), Errc::parse_error, "invalid target size");
    map.n_to = static_cast<int>(n_to);
    map.assignment.reserve(static_cast<std::size_t>(n_from));
    std::string token;
    while (in >> token) {
        std::size_t used = 0;
        long long v = -1;
        try {
            v = std::stoll(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size()) fail(Errc::parse_error, "non-integer entry '" + token + "' in point map");
        require(v >= 0 && v < n_to, Errc::index_out_of_range,
                "point map entry " + std::to_string(v) + " outside [0, " + std::to_string(n_to) + ")");
        map.assignment.push_back(static_cast<int>(v));
    }
    if (static_cast<long long>(map.assignment.size()) < n_from)
        fail(Errc::truncated, "point map lists " + std::to_string(map.assignment.size()) + " of " +
                                  std::to_string(n_from) + " entries");
    if (static_cast<long long>(map.assignment.size()) > n_from)
        fail(Errc::parse_error, "point map has more entries than its header declares");
    return map;
}

GroundTruth to_ground_truth(const PointMap& map)
{
    GroundTruth gt;
    gt.assignment = map.assignment;
    return gt;
}

void write_checkpoint(std::ostream& out, const FeatureModel& model)
{
    put_magic(out, "SSCM");
    put_u32(out, kCheckpointVersion);
    put_u32(out, model.mode == FeatureMode::SharedLinear ? 0u : 1u);
    put_u32(out, checked_u32(model.k, "basis size"));
    std::vector<const Eigen::MatrixXd*> blocks;
    if (model.mode == FeatureMode::SharedLinear) {
        blocks.push_back(&model.params.theta);
    } else {
        for (const auto& c : model.params.coeffs) blocks.push_back(&c);
    }
    put_u32(out, checked_u32(static_cast<Eigen::Index>(blocks.size()), "block count"));
    for (const auto* block : blocks) {
        put_u32(out, checked_u32(block->rows(), "block rows"));
        put_u32(out, checked_u32(block->cols(), "block columns"));
        for (Eigen::Index i = 0; i < block->size(); ++i) put_f64(out, block->data()[i]);
    }
    check_stream(out, "checkpoint");
}

FeatureModel read_checkpoint(std::istream& in)
{
    expect_magic(in, "SSCM");
    const std::uint32_t version = get_u32(in, "checkpoint header");
    if (version != kCheckpointVersion)
        fail(Errc::version_mismatch, "checkpoint version " + std::to_string(version) + ", expected " +
                                         std::to_string(kCheckpointVersion));
    const std::uint32_t mode = get_u32(in, "checkpoint header");
    if (mode > 1) fail(Errc::parse_error, "unknown model mode " + std::to_string(mode));
    FeatureModel model;
    model.mode = mode == 0 ? FeatureMode::SharedLinear : FeatureMode::DirectCoefficients;
    model.k = static_cast<int>(get_u32(in, "checkpoint header"));
    const std::uint32_t count = get_u32(in, "checkpoint header");
    if (model.mode == FeatureMode::SharedLinear && count != 1)
        fail(Errc::parse_error, "shared model must hold exactly one block");
    for (std::uint32_t b = 0; b < count; ++b) {
        const std::uint32_t rows = get_u32(in, "block header");
        const std::uint32_t cols = get_u32(in, "block header");
        Eigen::MatrixXd block(rows, cols);
        for (Eigen::Index i = 0; i < block.size(); ++i) block.data()[i] = get_f64(in, "block payload");
        if (model.mode == FeatureMode::SharedLinear) {
            model.params.theta = std::move(block);
        } else {
            model.params.coeffs.push_back(std::move(block));
        }
    }
    expect_end(in, "checkpoint payload");
    return model;
}

void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& history)
{
    out << "iteration,epoch,alpha,source,target,orth,consist,desc,lap,bij,total\n";
    out << std::fixed << std::setprecision(6);
    for (const auto& row : history) {
        out << row.iteration << ',' << row.epoch << ',' << row.alpha << ',' << row.source << ',' << row.target
            << ',' << row.terms.orth << ',' << row.terms.consist << ',' << row.terms.desc << ',' << row.terms.lap
            << ',' << row.terms.bij << ',' << row.total << '\n';
    }
    check_stream(out, "history");
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path)
{
    auto in = open_in(path, true);
    return read_matrix(in);
}

SpectralBasis load_basis(const std::filesystem::path& path)
{
    auto in = open_in(path, true);
    return read_basis(in);
}

FunctionalMap load_fmap(const std::filesystem::path& path)
{
    auto in = open_in(path, true);
    return read_fmap(in);
}

PointMap load_pointmap(const std::filesystem::path& path)
{
    auto in = open_in(path, false);
    return read_pointmap(in);
}

FeatureModel load_checkpoint(const std::filesystem::path& path)
{
    auto in = open_in(path, true);
    return read_checkpoint(in);
}

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m)
{
    auto out = open_out(path, true);
    write_matrix(out, m);
}

void save_basis(const std::filesystem::path& path, const SpectralBasis& basis)
{
    auto out = open_out(path, true);
    write_basis(out, basis);
}

void save_fmap(const std::filesystem::path& path, const FunctionalMap& map)
{
    auto out = open_out(path, true);
    write_fmap(out, map);
}

void save_pointmap(const std::filesystem::path& path, const PointMap& map)
{
    auto out = open_out(path, false);
    write_pointmap(out, map);
}

void save_checkpoint(const std::filesystem::path& path, const FeatureModel& model)
{
    auto out = open_out(path, true);
    write_checkpoint(out, model);
}

void save_history_csv(const std::filesystem::path& path, const std::vector<HistoryRow>& history)
{
    auto out = open_out(path, false);
    write_history_csv(out, history);
}

} // namespace cfm
