#include "smt/vocab.hpp"

#include "smt/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <unordered_set>

namespace smt {

const char* to_string(Modality m) {
    switch (m) {
        case Modality::Image: return "image";
        case Modality::Audio: return "audio";
        case Modality::Notation: return "notation";
        case Modality::Midi: return "midi";
    }
    throw Error("invalid modality value");
}

Modality modality_from_string(std::string_view s) {
    if (s == "image") return Modality::Image;
    if (s == "audio") return Modality::Audio;
    if (s == "notation") return Modality::Notation;
    if (s == "midi") return Modality::Midi;
    throw Error("unknown modality: " + std::string(s));
}

void VocabSpec::validate() const {
    if (image_codebooks != 4 || image_codebook_size != 1024)
        throw Error("image vocabulary must use 4 codebooks of 1024 codes");
    if (audio_codebooks != 4 || audio_codebook_size != 1024)
        throw Error("audio vocabulary must use 4 codebooks of 1024 codes");
    for (const auto* list : {&notation_tokens, &midi_tokens}) {
        std::unordered_set<std::string_view> seen;
        for (const auto& name : *list) {
            if (!seen.insert(name).second)
                throw Error("duplicate symbolic token name: " + name);
        }
    }
}

std::size_t BitMask::count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

VocabLayout build_vocab(const VocabSpec& spec) {
    spec.validate();
    VocabLayout layout;
    std::uint32_t next = 0;
    auto add_range = [&](Modality m, int cb, std::uint32_t size) {
        layout.ranges_.push_back({m, cb, next, size});
        next += size;
    };
    for (int cb = 0; cb < spec.image_codebooks; ++cb)
        add_range(Modality::Image, cb, static_cast<std::uint32_t>(spec.image_codebook_size));
    for (int cb = 0; cb < spec.audio_codebooks; ++cb)
        add_range(Modality::Audio, cb, static_cast<std::uint32_t>(spec.audio_codebook_size));
    add_range(Modality::Notation, 0, static_cast<std::uint32_t>(spec.notation_tokens.size()));
    add_range(Modality::Midi, 0, static_cast<std::uint32_t>(spec.midi_tokens.size()));
    for (Modality m : kAllModalities) {
        layout.sos_[static_cast<int>(m)] = next++;
        layout.eos_[static_cast<int>(m)] = next++;
    }
    layout.sep_ = next++;
    layout.pad_ = next++;
    layout.total_ = next;
    layout.notation_tokens_ = spec.notation_tokens;
    layout.midi_tokens_ = spec.midi_tokens;
    return layout;
}

int VocabLayout::codebooks(Modality m) const {
    int n = 0;
    for (const auto& r : ranges_)
        if (r.modality == m) ++n;
    return n;
}

std::uint32_t VocabLayout::codebook_size(Modality m, int codebook) const {
    for (const auto& r : ranges_)
        if (r.modality == m && r.codebook == codebook) return r.size;
    throw Error(std::string("no such codebook: ") + to_string(m) + " #" + std::to_string(codebook));
}

std::uint32_t VocabLayout::local_to_global(Modality m, int codebook, std::uint32_t local) const {
    for (const auto& r : ranges_) {
        if (r.modality != m || r.codebook != codebook) continue;
        if (local >= r.size)
            throw Error("local index " + std::to_string(local) + " out of range for " +
                        to_string(m) + " codebook " + std::to_string(codebook) +
                        " (size " + std::to_string(r.size) + ")");
        return r.begin + local;
    }
    throw Error(std::string("no such codebook: ") + to_string(m) + " #" + std::to_string(codebook));
}

VocabLayout::Decoded VocabLayout::global_to_local(std::uint32_t id) const {
    using Kind = Decoded::Kind;
    for (const auto& r : ranges_) {
        if (id >= r.begin && id < r.begin + r.size)
            return {Kind::Code, r.modality, r.codebook, id - r.begin};
    }
    for (Modality m : kAllModalities) {
        if (id == sos(m)) return {Kind::Sos, m, 0, 0};
        if (id == eos(m)) return {Kind::Eos, m, 0, 0};
    }
    if (id == sep_) return {Kind::Sep, Modality::Image, 0, 0};
    if (id == pad_) return {Kind::Pad, Modality::Image, 0, 0};
    throw Error("global id " + std::to_string(id) + " outside vocabulary of size " +
                std::to_string(total_));
}

BitMask VocabLayout::modality_mask(Modality target) const {
    BitMask mask(total_);
    for (const auto& r : ranges_) {
        if (r.modality != target) continue;
        for (std::uint32_t i = 0; i < r.size; ++i) mask.set(r.begin + i);
    }
    mask.set(eos(target));
    if (target == Modality::Image) mask.set(sep_);
    if (is_symbolic(target)) mask.set(pad_);
    return mask;
}

const std::vector<std::string>& VocabLayout::symbolic_tokens(Modality m) const {
    if (m == Modality::Notation) return notation_tokens_;
    if (m == Modality::Midi) return midi_tokens_;
    throw Error(std::string(to_string(m)) + " has no symbolic token list");
}

std::uint32_t VocabLayout::symbolic_local(Modality m, std::string_view name) const {
    const auto& list = symbolic_tokens(m);
    auto it = std::find(list.begin(), list.end(), name);
    if (it == list.end())
        throw Error("token not in " + std::string(to_string(m)) + " vocabulary: " + std::string(name));
    return static_cast<std::uint32_t>(it - list.begin());
}

std::string VocabLayout::to_json() const {
    nlohmann::ordered_json doc;
    doc["ranges"] = nlohmann::ordered_json::array();
    for (const auto& r : ranges_) {
        doc["ranges"].push_back({{"modality", to_string(r.modality)},
                                 {"codebook", r.codebook},
                                 {"begin", r.begin},
                                 {"size", r.size}});
    }
    nlohmann::ordered_json sos, eos;
    for (Modality m : kAllModalities) {
        sos[to_string(m)] = this->sos(m);
        eos[to_string(m)] = this->eos(m);
    }
    doc["specials"] = {{"sos", sos}, {"eos", eos}, {"sep", sep_}, {"pad", pad_}};
    doc["total"] = total_;
    return doc.dump(2) + "\n";
}

} // namespace smt
