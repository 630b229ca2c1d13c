#include "smt/codec.hpp"

#include "smt/errors.hpp"

#include <algorithm>
#include <cmath>

namespace smt {

SystemGrid make_system_grid(int width_px, int height_px, int codebooks) {
    if (width_px <= 0 || height_px <= 0) throw Error("system dimensions must be positive");
    if (width_px % kCompressionFactor != 0 || height_px % kCompressionFactor != 0)
        throw Error("system dimensions must be multiples of " + std::to_string(kCompressionFactor));
    SystemGrid grid;
    grid.columns = width_px / kCompressionFactor;
    grid.rows = height_px / kCompressionFactor;
    grid.codebooks = codebooks;
    grid.entries.assign(static_cast<std::size_t>(grid.columns) * grid.rows * codebooks, 0);
    return grid;
}

TokenGrid flatten_system(const SystemGrid& grid) {
    if (grid.entries.size() !=
        static_cast<std::size_t>(grid.columns) * grid.rows * grid.codebooks)
        throw Error("system grid entry count does not match its shape");
    TokenGrid out(Modality::Image, grid.codebooks);
    for (int c = 0; c < grid.columns; ++c)
        for (int r = 0; r < grid.rows; ++r) out.push_bundle(grid.bundle(r, c));
    return out;
}

SystemGrid unflatten_system(const TokenGrid& grid, int rows, int columns) {
    if (rows <= 0 || columns <= 0) throw Error("grid shape must be positive");
    if (grid.length() != static_cast<std::size_t>(rows) * columns)
        throw Error("token count does not match the requested shape");
    SystemGrid out;
    out.rows = rows;
    out.columns = columns;
    out.codebooks = grid.codebooks();
    out.entries.resize(grid.entries().size());
    for (int c = 0; c < columns; ++c) {
        for (int r = 0; r < rows; ++r) {
            auto src = grid.bundle(static_cast<std::size_t>(c) * rows + r);
            auto dst = (static_cast<std::size_t>(r) * columns + c) * grid.codebooks();
            std::copy(src.begin(), src.end(), out.entries.begin() + static_cast<std::ptrdiff_t>(dst));
        }
    }
    return out;
}

TokenGrid assemble_systems(std::span<const TokenGrid> systems) {
    if (systems.empty()) throw Error("cannot assemble an empty system list");
    const int d = systems.front().codebooks();
    for (const auto& g : systems) {
        if (g.modality() != Modality::Image) throw Error("assemble_systems expects image grids");
        if (g.codebooks() != d) throw Error("all systems must share the codebook count");
    }
    TokenGrid out(Modality::Image, d);
    for (std::size_t i = 0; i < systems.size(); ++i) {
        if (i > 0) out.push_uniform(kSepSentinel, kPadSentinel);
        for (std::size_t pos = 0; pos < systems[i].length(); ++pos)
            out.push_bundle(systems[i].bundle(pos));
    }
    return out;
}

std::int64_t audio_frame_count(double seconds) {
    if (!(seconds > 0.0)) throw Error("duration must be positive");
    // 44100/512 is a dyadic rational, so the product is exact for exact inputs.
    return static_cast<std::int64_t>(
        std::ceil(seconds * (static_cast<double>(kSampleRate) / kHopSize)));
}

GrayImage threshold_image(const GrayImage& img) {
    if (img.pixels.empty()) return img;
    std::vector<std::uint8_t> sorted(img.pixels);
    auto mid = sorted.begin() + static_cast<std::ptrdiff_t>((sorted.size() - 1) / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    const int threshold = static_cast<int>(*mid) - 20;
    GrayImage out = img;
    for (auto& p : out.pixels)
        if (static_cast<int>(p) > threshold) p = 255;
    return out;
}

std::vector<ShiftOffset> enumerate_shift_variants(Modality kind) {
    std::vector<ShiftOffset> offsets;
    if (kind == Modality::Image) {
        for (int dx = 0; dx < 8; ++dx)
            for (int dy = 0; dy < 4; ++dy) offsets.push_back({dx, dy});
    } else if (kind == Modality::Audio) {
        for (int k = 0; k < 9; ++k) offsets.push_back({k * 57, 0});
    } else {
        throw Error("shift variants are defined for image and audio only");
    }
    return offsets;
}

} // namespace smt
