#include "smt/errors.hpp"
#include "smt/vocab.hpp"

#include <doctest.h>

#include <set>
#include <string>

using namespace smt;

namespace {

VocabSpec paper_spec(std::size_t notation, std::size_t midi) {
    VocabSpec spec;
    for (std::size_t i = 0; i < notation; ++i)
        spec.notation_tokens.push_back("n" + std::to_string(i));
    for (std::size_t i = 0; i < midi; ++i) spec.midi_tokens.push_back("m" + std::to_string(i));
    return spec;
}

} // namespace

TEST_SUITE("vocab") {

TEST_CASE("layout size follows the fixed assignment order") {
    auto layout = build_vocab(paper_spec(500, 1000));
    CHECK(layout.total() == 9702); // 4096+4096+500+1000+8+2

    auto tiny = build_vocab(paper_spec(500, 1));
    CHECK(tiny.total() == 8703);
}

TEST_CASE("empty notation list still allocates its specials") {
    auto layout = build_vocab(paper_spec(0, 1000));
    CHECK(layout.codebook_size(Modality::Notation, 0) == 0);
    CHECK(layout.sos(Modality::Notation) != layout.eos(Modality::Notation));
    CHECK(layout.total() == 4096 + 4096 + 1000 + 8 + 2);
}

TEST_CASE("duplicate symbolic names are rejected with the offending name") {
    VocabSpec spec = paper_spec(3, 0);
    spec.notation_tokens.push_back("n1");
    CHECK_THROWS_WITH_AS(build_vocab(spec), doctest::Contains("n1"), Error);
}

TEST_CASE("local_to_global places codebooks contiguously") {
    auto layout = build_vocab(paper_spec(500, 1000));
    CHECK(layout.local_to_global(Modality::Image, 0, 0) == 0);
    CHECK(layout.local_to_global(Modality::Image, 1, 0) == 1024);
    CHECK(layout.local_to_global(Modality::Audio, 0, 5) == 4101);
    CHECK(layout.local_to_global(Modality::Notation, 0, 3) == 8192 + 3);
    CHECK_THROWS_AS(layout.local_to_global(Modality::Image, 0, 1024), Error);
    CHECK_THROWS_AS(layout.local_to_global(Modality::Notation, 0, 500), Error);
    CHECK_THROWS_AS(layout.local_to_global(Modality::Notation, 1, 0), Error);
}

TEST_CASE("global_to_local inverts local_to_global over the whole space") {
    auto layout = build_vocab(paper_spec(7, 3));
    for (std::uint32_t id = 0; id < layout.total(); ++id) {
        auto decoded = layout.global_to_local(id);
        if (decoded.kind == VocabLayout::Decoded::Kind::Code)
            CHECK(layout.local_to_global(decoded.modality, decoded.codebook, decoded.local) == id);
    }
    for (const auto& range : layout.ranges()) {
        for (std::uint32_t local = 0; local < range.size; ++local) {
            auto id = layout.local_to_global(range.modality, range.codebook, local);
            auto decoded = layout.global_to_local(id);
            CHECK(decoded.kind == VocabLayout::Decoded::Kind::Code);
            CHECK(decoded.modality == range.modality);
            CHECK(decoded.codebook == range.codebook);
            CHECK(decoded.local == local);
        }
    }
}

TEST_CASE("ranges plus specials tile the id space exactly") {
    auto layout = build_vocab(paper_spec(5, 9));
    std::set<std::uint32_t> seen;
    for (const auto& r : layout.ranges())
        for (std::uint32_t i = 0; i < r.size; ++i) CHECK(seen.insert(r.begin + i).second);
    for (Modality m : kAllModalities) {
        CHECK(seen.insert(layout.sos(m)).second);
        CHECK(seen.insert(layout.eos(m)).second);
    }
    CHECK(seen.insert(layout.sep()).second);
    CHECK(seen.insert(layout.pad()).second);
    CHECK(seen.size() == layout.total());
    CHECK(*seen.rbegin() == layout.total() - 1);
}

TEST_CASE("modality masks admit exactly the contracted ids") {
    auto layout = build_vocab(paper_spec(500, 1000));

    auto notation = layout.modality_mask(Modality::Notation);
    CHECK(notation.count() == 502); // 500 + EOS_N + PAD
    CHECK(notation.test(layout.pad()));
    CHECK(notation.test(layout.eos(Modality::Notation)));
    CHECK_FALSE(notation.test(layout.sep()));
    CHECK_FALSE(notation.test(layout.sos(Modality::Notation)));

    auto image = layout.modality_mask(Modality::Image);
    CHECK(image.count() == 4098); // 4096 + EOS_I + SEP
    CHECK(image.test(layout.sep()));
    CHECK_FALSE(image.test(layout.pad()));

    auto audio = layout.modality_mask(Modality::Audio);
    CHECK(audio.count() == 4097); // 4096 + EOS_A
    CHECK_FALSE(audio.test(layout.sep()));

    auto midi = layout.modality_mask(Modality::Midi);
    CHECK(midi.count() == 1002); // 1000 + EOS_M + PAD

    for (Modality target : kAllModalities) {
        auto mask = layout.modality_mask(target);
        for (Modality other : kAllModalities)
            if (other != target) CHECK_FALSE(mask.test(layout.sos(other)));
    }

    // symbolic targets share only PAD
    for (std::uint32_t id = 0; id < layout.total(); ++id)
        if (notation.test(id) && midi.test(id)) CHECK(id == layout.pad());
}

TEST_CASE("serialization is byte-identical for identical specs") {
    auto a = build_vocab(paper_spec(500, 1000));
    auto b = build_vocab(paper_spec(500, 1000));
    CHECK(a.to_json() == b.to_json());
    CHECK(a.to_json().find("\"total\": 9702") != std::string::npos);
}

TEST_CASE("spec invariants are enforced") {
    VocabSpec spec = paper_spec(2, 2);
    spec.image_codebooks = 2;
    CHECK_THROWS_AS(build_vocab(spec), Error);
    spec = paper_spec(2, 2);
    spec.audio_codebook_size = 512;
    CHECK_THROWS_AS(build_vocab(spec), Error);
}

} // TEST_SUITE
