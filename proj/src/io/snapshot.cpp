#include <bit>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "fibreflow/error.hpp"
#include "fibreflow/io.hpp"

namespace fibreflow {

namespace {

constexpr char magic[] = "FIBREFLOW1";
constexpr std::size_t magic_len = 10;

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
    for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(std::uint8_t((std::uint64_t(v) >> (8 * b)) & 0xff));
}

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}

    template <class T>
    T get(const char* what) {
        need(sizeof(T), what);
        std::uint64_t v = 0;
        for (std::size_t b = 0; b < sizeof(T); ++b) v |= std::uint64_t(bytes_[pos_ + b]) << (8 * b);
        pos_ += sizeof(T);
        return T(v);
    }

    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n)
            throw IntegrityError("snapshot truncated at byte offset " + std::to_string(bytes_.size()) + " while reading " +
                                 what + " (needed " + std::to_string(n) + " bytes at offset " + std::to_string(pos_) +
                                 ")");
    }

    std::size_t pos() const { return pos_; }
    void skip(std::size_t n) { pos_ += n; }
    const std::uint8_t* here() const { return bytes_.data() + pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

std::uint32_t crc_of(const std::uint8_t* p, std::size_t n) {
    uLong c = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks
    while (n > 0) {
        const std::size_t chunk = std::min<std::size_t>(n, 1u << 30);
        c = crc32(c, p, uInt(chunk));
        p += chunk;
        n -= chunk;
    }
    return std::uint32_t(c);
}

void check_grid(const Snapshot& s, const Grid& g, std::uint8_t components) {
    if (s.components != components)
        throw FormatError("snapshot '" + s.name + "': expected " + std::to_string(components) + " components, found " +
                          std::to_string(s.components));
    const bool full = s.mode == GridMode::full;
    if (full != g.full() || int(s.nu) != g.nu() || int(s.nv) != g.nv() ||
        (full && (int(s.nx) != g.nx() || int(s.ny) != g.ny())))
        throw FormatError("snapshot '" + s.name + "': grid dims do not match the target grid");
}

}  // namespace

std::size_t Snapshot::points() const {
    const std::size_t base = std::size_t(nu) * nv;
    return mode == GridMode::full ? base * nx * ny : base;
}

Snapshot make_snapshot(const ScalarField& f, const std::string& name) {
    const Grid& g = f.grid();
    return {name, std::uint32_t(g.nx()), std::uint32_t(g.ny()), std::uint32_t(g.nu()), std::uint32_t(g.nv()),
            g.full() ? GridMode::full : GridMode::symmetric, 1, f.values()};
}

Snapshot make_snapshot(const HermitianFormField& f, const std::string& name) {
    const Grid& g = f.grid();
    Snapshot s{name, std::uint32_t(g.nx()), std::uint32_t(g.ny()), std::uint32_t(g.nu()), std::uint32_t(g.nv()),
               g.full() ? GridMode::full : GridMode::symmetric, 4, {}};
    s.values.reserve(4 * f.a.size());
    for (const auto* c : {&f.a, &f.d, &f.br, &f.bi}) s.values.insert(s.values.end(), c->begin(), c->end());
    return s;
}

std::vector<std::uint8_t> encode_snapshot(const Snapshot& s) {
    if (s.components != 1 && s.components != 2 && s.components != 4)
        throw FormatError("snapshot: unsupported component count " + std::to_string(s.components));
    if (s.values.size() != s.points() * s.components)
        throw FormatError("snapshot '" + s.name + "': value count does not match dims");
    if (s.name.size() > 0xffff) throw FormatError("snapshot: field name too long");
    std::vector<std::uint8_t> out(magic, magic + magic_len);
    for (std::uint32_t d : {s.nx, s.ny, s.nu, s.nv}) put(out, d);
    put(out, std::uint8_t(s.mode == GridMode::full ? 1 : 0));
    put(out, s.components);
    put(out, std::uint16_t(s.name.size()));
    out.insert(out.end(), s.name.begin(), s.name.end());
    put(out, std::uint64_t(s.values.size()));
    const std::size_t payload = out.size();
    for (double v : s.values) put(out, std::bit_cast<std::uint64_t>(v));
    put(out, crc_of(out.data() + payload, out.size() - payload));
    return out;
}

Snapshot decode_snapshot(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    r.need(magic_len, "magic");
    if (!std::equal(magic, magic + magic_len, r.here())) throw FormatError("snapshot: bad magic");
    r.skip(magic_len);
    Snapshot s;
    s.nx = r.get<std::uint32_t>("nx");
    s.ny = r.get<std::uint32_t>("ny");
    s.nu = r.get<std::uint32_t>("nu");
    s.nv = r.get<std::uint32_t>("nv");
    const auto mode = r.get<std::uint8_t>("mode");
    if (mode > 1) throw FormatError("snapshot: bad mode byte " + std::to_string(mode));
    s.mode = mode ? GridMode::full : GridMode::symmetric;
    s.components = r.get<std::uint8_t>("components");
    if (s.components != 1 && s.components != 2 && s.components != 4)
        throw FormatError("snapshot: unsupported component count " + std::to_string(s.components));
    const auto len = r.get<std::uint16_t>("name length");
    r.need(len, "name");
    s.name.assign(reinterpret_cast<const char*>(r.here()), len);
    r.skip(len);
    const auto count = r.get<std::uint64_t>("count");
    if (count != s.points() * s.components)
        throw FormatError("snapshot '" + s.name + "': header dims give " + std::to_string(s.points() * s.components) +
                          " values but count is " + std::to_string(count));
    if (count > r.remaining() / 8) r.need(count * 8 + 4, "payload");
    const std::size_t payload = r.pos();
    s.values.resize(count);
    for (auto& v : s.values) v = std::bit_cast<double>(r.get<std::uint64_t>("payload"));
    const std::uint32_t expect = crc_of(bytes.data() + payload, r.pos() - payload);
    const auto stored = r.get<std::uint32_t>("checksum");
    if (stored != expect) throw IntegrityError("snapshot '" + s.name + "': payload checksum mismatch");
    if (r.remaining() != 0)
        throw FormatError("snapshot: " + std::to_string(r.remaining()) + " trailing bytes after checksum");
    return s;
}

void write_snapshot(const Snapshot& s, const std::filesystem::path& path) {
    const auto bytes = encode_snapshot(s);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("snapshot: cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw Error("snapshot: write failed for " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("snapshot: cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_snapshot(bytes);
}

ScalarField scalar_from_snapshot(const Snapshot& s, GridPtr g) {
    check_grid(s, *g, 1);
    return ScalarField(std::move(g), s.values);
}

HermitianFormField form_from_snapshot(const Snapshot& s, GridPtr g) {
    check_grid(s, *g, 4);
    HermitianFormField f(g);
    const std::size_t n = f.a.size();
    auto it = s.values.begin();
    for (auto* c : {&f.a, &f.d, &f.br, &f.bi}) {
        std::copy(it, it + std::ptrdiff_t(n), c->begin());
        it += std::ptrdiff_t(n);
    }
    return f;
}

}  // namespace fibreflow
