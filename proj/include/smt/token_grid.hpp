#pragma once

#include "smt/vocab.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace smt {

// Sentinel entries inside token bundles. PAD and SEP are also the on-disk
// sentinels of the TGR1 format; SOS/EOS appear only in wrapped in-memory
// sequences and never in TGR1 files.
inline constexpr std::uint16_t kPadSentinel = 0xFFFF;
inline constexpr std::uint16_t kSepSentinel = 0xFFFE;
inline constexpr std::uint16_t kSosSentinel = 0xFFFD;
inline constexpr std::uint16_t kEosSentinel = 0xFFFC;

inline bool is_sentinel(std::uint16_t v) { return v >= kEosSentinel; }

/// An L x d array of codebook-local token indices tagged with a modality.
/// Entries are stored bundle-major: bundle(i) = entries[i*d .. i*d+d).
class TokenGrid {
public:
    TokenGrid(Modality modality, int codebooks)
        : modality_(modality), codebooks_(codebooks) {}
    TokenGrid(Modality modality, int codebooks, std::vector<std::uint16_t> entries);

    Modality modality() const { return modality_; }
    int codebooks() const { return codebooks_; }
    std::size_t length() const { return entries_.size() / static_cast<std::size_t>(codebooks_); }

    std::uint16_t at(std::size_t pos, int codebook) const {
        return entries_[pos * static_cast<std::size_t>(codebooks_) + static_cast<std::size_t>(codebook)];
    }
    std::span<const std::uint16_t> bundle(std::size_t pos) const {
        return {entries_.data() + pos * static_cast<std::size_t>(codebooks_),
                static_cast<std::size_t>(codebooks_)};
    }
    void push_bundle(std::span<const std::uint16_t> bundle);
    /// Appends a bundle with `value` in codebook 1 and `fill` in codebooks 2..d.
    void push_uniform(std::uint16_t value, std::uint16_t fill);

    const std::vector<std::uint16_t>& entries() const { return entries_; }
    TokenGrid slice(std::size_t begin, std::size_t count) const;

    bool operator==(const TokenGrid&) const = default;

private:
    Modality modality_;
    int codebooks_;
    std::vector<std::uint16_t> entries_;
};

/// Checks that every non-sentinel entry is below its codebook's size.
void validate_grid(const TokenGrid& grid, const VocabLayout& layout);

// TGR1 container: magic "TGR1", u8 modality code, u8 codebook count,
// u32-le length, then L*d u16-le entries in bundle-major order.
void write_tgr(std::ostream& out, const TokenGrid& grid);
TokenGrid read_tgr(std::istream& in);
void write_tgr_file(const std::filesystem::path& path, const TokenGrid& grid);
TokenGrid read_tgr_file(const std::filesystem::path& path);

} // namespace smt
