#include "smt/token_grid.hpp"

#include "smt/errors.hpp"
#include "smt/io.hpp"

#include <fstream>
#include <sstream>

namespace smt {

TokenGrid::TokenGrid(Modality modality, int codebooks, std::vector<std::uint16_t> entries)
    : modality_(modality), codebooks_(codebooks), entries_(std::move(entries)) {
    if (codebooks_ <= 0) throw Error("codebook count must be positive");
    if (entries_.size() % static_cast<std::size_t>(codebooks_) != 0)
        throw Error("entry count is not a multiple of the codebook count");
}

void TokenGrid::push_bundle(std::span<const std::uint16_t> bundle) {
    if (bundle.size() != static_cast<std::size_t>(codebooks_))
        throw Error("bundle width mismatch");
    entries_.insert(entries_.end(), bundle.begin(), bundle.end());
}

void TokenGrid::push_uniform(std::uint16_t value, std::uint16_t fill) {
    entries_.push_back(value);
    for (int cb = 1; cb < codebooks_; ++cb) entries_.push_back(fill);
}

TokenGrid TokenGrid::slice(std::size_t begin, std::size_t count) const {
    if (begin + count > length()) throw Error("slice exceeds grid length");
    const auto d = static_cast<std::size_t>(codebooks_);
    std::vector<std::uint16_t> sub(entries_.begin() + static_cast<std::ptrdiff_t>(begin * d),
                                   entries_.begin() + static_cast<std::ptrdiff_t>((begin + count) * d));
    return TokenGrid(modality_, codebooks_, std::move(sub));
}

void validate_grid(const TokenGrid& grid, const VocabLayout& layout) {
    const int d = grid.codebooks();
    for (std::size_t pos = 0; pos < grid.length(); ++pos) {
        for (int cb = 0; cb < d; ++cb) {
            std::uint16_t v = grid.at(pos, cb);
            if (is_sentinel(v)) continue;
            if (v >= layout.codebook_size(grid.modality(), cb))
                throw Error("token index " + std::to_string(v) + " at position " +
                            std::to_string(pos) + " exceeds codebook size");
        }
    }
}

namespace {

void put_u32le(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                 static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(b, 4);
}

std::uint32_t get_u32le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw Error("truncated TGR1 stream");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

} // namespace

void write_tgr(std::ostream& out, const TokenGrid& grid) {
    out.write("TGR1", 4);
    out.put(static_cast<char>(static_cast<std::uint8_t>(grid.modality())));
    out.put(static_cast<char>(static_cast<std::uint8_t>(grid.codebooks())));
    put_u32le(out, static_cast<std::uint32_t>(grid.length()));
    for (std::uint16_t v : grid.entries()) {
        out.put(static_cast<char>(v & 0xFF));
        out.put(static_cast<char>(v >> 8));
    }
    if (!out) throw Error("TGR1 write failed");
}

TokenGrid read_tgr(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != "TGR1") throw Error("not a TGR1 stream");
    int modality_code = in.get();
    int d = in.get();
    if (modality_code < 0 || modality_code > 3) throw Error("invalid modality code in TGR1 header");
    if (d <= 0) throw Error("invalid codebook count in TGR1 header");
    std::uint32_t length = get_u32le(in);
    std::vector<std::uint16_t> entries;
    entries.reserve(static_cast<std::size_t>(length) * static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < static_cast<std::size_t>(length) * static_cast<std::size_t>(d); ++i) {
        int lo = in.get(), hi = in.get();
        if (lo < 0 || hi < 0) throw Error("truncated TGR1 stream");
        entries.push_back(static_cast<std::uint16_t>(lo | (hi << 8)));
    }
    return TokenGrid(static_cast<Modality>(modality_code), d, std::move(entries));
}

void write_tgr_file(const std::filesystem::path& path, const TokenGrid& grid) {
    std::ostringstream buf(std::ios::binary);
    write_tgr(buf, grid);
    atomic_write_file(path, buf.str());
}

TokenGrid read_tgr_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    return read_tgr(in);
}

} // namespace smt
