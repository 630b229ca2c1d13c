#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace smt {

/// Single-channel 8-bit image, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    bool operator==(const GrayImage&) const = default;
};

// Binary PGM (P5), maxval <= 255.
GrayImage read_pgm(std::istream& in);
GrayImage read_pgm_file(const std::filesystem::path& path);
void write_pgm(std::ostream& out, const GrayImage& img);
void write_pgm_file(const std::filesystem::path& path, const GrayImage& img);

} // namespace smt
