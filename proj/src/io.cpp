#include "awr/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <system_error>
#include <unistd.h>

#include "json.hpp"

#include "awr/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian; big-endian hosts are unsupported");

namespace awr {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kFieldFormat = 1;

std::vector<std::string> component_names(const std::string& kind, int dim) {
    if (kind == "scalar") return {"f"};
    if (kind == "vector") {
        std::vector<std::string> names;
        for (int c = 0; c < dim; ++c) names.push_back("v" + std::to_string(c));
        return names;
    }
    if (kind == "tensor0")
        return dim == 2 ? std::vector<std::string>{"t00", "t01"}
                        : std::vector<std::string>{"t00", "t11", "t01", "t02", "t12"};
    fail(ErrorCode::BadConfig, "unknown field kind '" + kind + "'");
}

void write_raw(const std::string& path, const std::string& kind, const Grid& g,
               const std::vector<const std::vector<double>*>& blocks) {
    ordered_json header;
    header["awr_field"] = kFieldFormat;
    header["kind"] = kind;
    header["dim"] = g.dim;
    header["n"] = g.n;
    header["components"] = component_names(kind, g.dim);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::BadConfig, path + ": cannot open for writing");
    const std::string head = header.dump();
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    out.put('\n');
    for (const auto* block : blocks)
        out.write(reinterpret_cast<const char*>(block->data()),
                  static_cast<std::streamsize>(block->size() * sizeof(double)));
    if (!out) fail(ErrorCode::BadConfig, path + ": write failed");
}

struct ParsedField {
    Grid grid;
    std::vector<std::vector<double>> blocks;
};

ParsedField read_raw(const std::string& path, const std::string& want_kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::BadConfig, path + ": cannot open for reading");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    const std::size_t nl = bytes.find('\n');
    if (nl == std::string::npos)
        fail(ErrorCode::BadConfig,
             path + ": header newline not found in " + std::to_string(bytes.size()) + " bytes");
    ordered_json header;
    try {
        header = ordered_json::parse(bytes.substr(0, nl));
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::BadConfig,
             path + ": malformed header at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    if (!header.is_object() || header.value("awr_field", -1) != kFieldFormat)
        fail(ErrorCode::BadConfig, path + ": not a field file (missing awr_field tag)");
    const std::string kind = header.value("kind", "");
    if (kind != want_kind)
        fail(ErrorCode::BadConfig,
             path + ": field kind is '" + kind + "', expected '" + want_kind + "'");
    const int dim = header.value("dim", 0);
    const int n = header.value("n", 0);
    if (dim < 1 || dim > 3 || n < 2)
        fail(ErrorCode::BadConfig, path + ": invalid grid header (dim " + std::to_string(dim) +
                                       ", n " + std::to_string(n) + ")");
    const auto names = component_names(want_kind, dim);
    if (header.value("components", std::vector<std::string>{}) != names)
        fail(ErrorCode::BadConfig, path + ": component list does not match kind '" + kind + "'");

    ParsedField out;
    out.grid = Grid(dim, n);
    const std::size_t count = out.grid.size();
    const std::size_t payload_offset = nl + 1;
    const std::size_t expected = names.size() * count * sizeof(double);
    const std::size_t actual = bytes.size() - payload_offset;
    if (actual != expected)
        fail(ErrorCode::BadConfig, path + ": payload holds " + std::to_string(actual) +
                                       " bytes at offset " + std::to_string(payload_offset) +
                                       ", expected " + std::to_string(expected));
    const char* src = bytes.data() + payload_offset;
    for (std::size_t b = 0; b < names.size(); ++b) {
        std::vector<double> block(count);
        std::memcpy(block.data(), src + b * count * sizeof(double), count * sizeof(double));
        out.blocks.push_back(std::move(block));
    }
    return out;
}

} // namespace

void write_field(const std::string& path, const ScalarField& f) {
    write_raw(path, "scalar", f.grid, {&f.v});
}

void write_field(const std::string& path, const VectorField& f) {
    std::vector<const std::vector<double>*> blocks;
    for (int c = 0; c < f.dim(); ++c) blocks.push_back(&f[c].v);
    write_raw(path, "vector", f.grid, blocks);
}

void write_field(const std::string& path, const SymTensorField0& f) {
    std::vector<const std::vector<double>*> blocks;
    for (const ScalarField& c : f.comp) blocks.push_back(&c.v);
    write_raw(path, "tensor0", f.grid, blocks);
}

ScalarField read_scalar_field(const std::string& path) {
    ParsedField p = read_raw(path, "scalar");
    ScalarField f(p.grid);
    f.v = std::move(p.blocks[0]);
    return f;
}

VectorField read_vector_field(const std::string& path) {
    ParsedField p = read_raw(path, "vector");
    VectorField f(p.grid);
    for (int c = 0; c < p.grid.dim; ++c) f[c].v = std::move(p.blocks[c]);
    return f;
}

SymTensorField0 read_tensor_field(const std::string& path) {
    ParsedField p = read_raw(path, "tensor0");
    SymTensorField0 f(p.grid);
    for (std::size_t c = 0; c < p.blocks.size(); ++c) f.comp[c].v = std::move(p.blocks[c]);
    return f;
}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::BadConfig, path + ": cannot open for writing");
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size())
            fail(ErrorCode::BadConfig, path + ": row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
    if (!out) fail(ErrorCode::BadConfig, path + ": write failed");
}

std::vector<std::vector<double>> read_csv(const std::string& path,
                                          std::vector<std::string>* header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::BadConfig, path + ": cannot open for reading");
    std::string line;
    const auto strip_cr = [](std::string& s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
    };
    if (!std::getline(in, line)) fail(ErrorCode::BadConfig, path + ": missing header line");
    strip_cr(line);
    if (header) {
        header->clear();
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const std::size_t comma = line.find(',', pos);
            header->push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty()) continue;
        std::vector<double> row;
        const char* cur = line.data();
        const char* end = line.data() + line.size();
        while (true) {
            double value = 0.0;
            const auto res = std::from_chars(cur, end, value);
            if (res.ec != std::errc())
                fail(ErrorCode::BadConfig, path + ": bad number at line " +
                                               std::to_string(lineno) + ", column " +
                                               std::to_string(cur - line.data() + 1));
            row.push_back(value);
            cur = res.ptr;
            if (cur == end) break;
            if (*cur != ',')
                fail(ErrorCode::BadConfig, path + ": expected ',' at line " +
                                               std::to_string(lineno) + ", column " +
                                               std::to_string(cur - line.data() + 1));
            ++cur;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

DirLock::DirLock(const std::filesystem::path& dir) : lock_path_(dir / ".lock") {
    const int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        if (errno == EEXIST)
            fail(ErrorCode::BadConfig,
                 lock_path_.string() + ": directory is locked by another writer");
        fail(ErrorCode::BadConfig, lock_path_.string() + ": cannot create lock: " +
                                       std::system_category().message(errno));
    }
    ::close(fd);
}

DirLock::~DirLock() {
    std::error_code ec;
    std::filesystem::remove(lock_path_, ec);
}

} // namespace awr
