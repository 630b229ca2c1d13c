#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace smt {

enum class Modality : std::uint8_t { Image = 0, Audio = 1, Notation = 2, Midi = 3 };

inline constexpr std::array<Modality, 4> kAllModalities = {
    Modality::Image, Modality::Audio, Modality::Notation, Modality::Midi};

const char* to_string(Modality m);
Modality modality_from_string(std::string_view s);

inline bool is_symbolic(Modality m) {
    return m == Modality::Notation || m == Modality::Midi;
}

/// Input configuration for the unified token space. Image and audio are
/// residual-quantized with four codebooks of 1024 codes each; notation and
/// MIDI vocabularies are ordered name lists.
struct VocabSpec {
    int image_codebooks = 4;
    int image_codebook_size = 1024;
    int audio_codebooks = 4;
    int audio_codebook_size = 1024;
    std::vector<std::string> notation_tokens;
    std::vector<std::string> midi_tokens;

    void validate() const; // throws Error on violation
};

struct TokenRange {
    Modality modality;
    int codebook; // 0-based; always 0 for symbolic modalities
    std::uint32_t begin;
    std::uint32_t size;
};

/// Fixed-size bit vector over the global id space.
class BitMask {
public:
    explicit BitMask(std::uint32_t size) : size_(size), words_((size + 63) / 64, 0) {}
    std::uint32_t size() const { return size_; }
    bool test(std::uint32_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::uint32_t i) { words_[i >> 6] |= std::uint64_t(1) << (i & 63); }
    std::size_t count() const;

private:
    std::uint32_t size_;
    std::vector<std::uint64_t> words_;
};

/// The unified global id space. Assignment order is fixed: image codebooks
/// 1-4, audio codebooks 1-4, notation, MIDI, then SOS/EOS per modality in
/// that modality order, then SEP, then PAD as the last id.
class VocabLayout {
public:
    struct Decoded {
        enum class Kind { Code, Sos, Eos, Sep, Pad };
        Kind kind;
        Modality modality; // valid for Code/Sos/Eos
        int codebook;      // valid for Code
        std::uint32_t local;
    };

    std::uint32_t total() const { return total_; }
    const std::vector<TokenRange>& ranges() const { return ranges_; }

    int codebooks(Modality m) const;
    std::uint32_t codebook_size(Modality m, int codebook) const;

    std::uint32_t local_to_global(Modality m, int codebook, std::uint32_t local) const;
    Decoded global_to_local(std::uint32_t global_id) const;

    std::uint32_t sos(Modality m) const { return sos_[static_cast<int>(m)]; }
    std::uint32_t eos(Modality m) const { return eos_[static_cast<int>(m)]; }
    std::uint32_t sep() const { return sep_; }
    std::uint32_t pad() const { return pad_; }

    /// Logit restriction for decoding into `target`: the target's own code
    /// ranges, its EOS, SEP for image targets, and PAD for symbolic targets.
    BitMask modality_mask(Modality target) const;

    const std::vector<std::string>& symbolic_tokens(Modality m) const;
    /// Local index of a named symbolic token, or throws.
    std::uint32_t symbolic_local(Modality m, std::string_view name) const;

    /// Byte-stable JSON document with keys `ranges`, `specials`, `total`.
    std::string to_json() const;

    friend VocabLayout build_vocab(const VocabSpec& spec);

private:
    std::vector<TokenRange> ranges_;
    std::array<std::uint32_t, 4> sos_{}, eos_{};
    std::uint32_t sep_ = 0, pad_ = 0;
    std::uint32_t total_ = 0;
    std::vector<std::string> notation_tokens_, midi_tokens_;
};

VocabLayout build_vocab(const VocabSpec& spec);

} // namespace smt
