#pragma once

#include "smt/image.hpp"
#include "smt/token_grid.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace smt {

// Codec constants: 16x spatial compression for images, 44.1 kHz mono audio
// tokenized at a 512-sample hop.
inline constexpr int kCompressionFactor = 16;
inline constexpr int kSampleRate = 44100;
inline constexpr int kHopSize = 512;

/// One musical system's 2-D token grid, row-major. columns = W/16, rows = H/16.
struct SystemGrid {
    int columns = 0;
    int rows = 0;
    int codebooks = 0;
    std::vector<std::uint16_t> entries; // row-major bundles, entries.size() == columns*rows*codebooks

    std::span<const std::uint16_t> bundle(int row, int column) const {
        auto idx = (static_cast<std::size_t>(row) * columns + column) * codebooks;
        return {entries.data() + idx, static_cast<std::size_t>(codebooks)};
    }
    bool operator==(const SystemGrid&) const = default;
};

/// Grid shape for a W x H pixel system; both must be multiples of 16.
SystemGrid make_system_grid(int width_px, int height_px, int codebooks);

/// 2-D -> 1-D in vertical reading order: top-to-bottom within a column,
/// then left-to-right between columns. Output position c*rows + r holds
/// the bundle at (row r, column c).
TokenGrid flatten_system(const SystemGrid& grid);
SystemGrid unflatten_system(const TokenGrid& grid, int rows, int columns);

/// Concatenates K image-modality grids with a SEP bundle between systems:
/// L = sum(L_i) + (K-1). SEP bundles carry the SEP sentinel in codebook 1
/// and PAD in codebooks 2..d.
TokenGrid assemble_systems(std::span<const TokenGrid> systems);

/// ceil(seconds * 44100 / 512); 20 s -> 1723 frames.
std::int64_t audio_frame_count(double seconds);

/// Background normalization: every pixel strictly above median-20 becomes
/// white (255). Even pixel counts use the lower median.
GrayImage threshold_image(const GrayImage& img);

/// Augmentation offset. Images use (horizontal, vertical) pixel shifts;
/// audio uses sample offsets in `horizontal` with `vertical` = 0.
struct ShiftOffset {
    int horizontal = 0;
    int vertical = 0;
    bool operator==(const ShiftOffset&) const = default;
};

/// Image -> 32 pixel-shift pairs (dx in 0..7, dy in 0..3); Audio -> 9 sample
/// offsets at multiples of 57 within one hop. Symbolic modalities are rejected.
std::vector<ShiftOffset> enumerate_shift_variants(Modality kind);

} // namespace smt
