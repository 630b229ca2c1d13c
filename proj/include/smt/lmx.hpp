#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smt {

// Notation vocabulary: marker tokens, then the 53 chromatic pitch names
// C2..E6 (sharps canonical), then the 13 duration classes in 2:1 steps
// from maxima down to 512th.
const std::vector<std::string>& pitch_token_names();    // 53 names
const std::vector<std::string>& duration_token_names(); // 13 names
const std::vector<std::string>& notation_vocab();       // full ordered list

inline constexpr int kMinPitchSemitone = 36; // C2
inline constexpr int kMaxPitchSemitone = 88; // E6
inline constexpr int kMaxVoice = 8;

std::string pitch_token_from_semitone(int semitone);
std::optional<int> semitone_from_pitch_token(std::string_view name);
std::optional<int> duration_class_from_name(std::string_view name);

struct NoteElem {
    bool rest = false;
    int semitone = 60;      // MIDI number, valid range C2..E6 when not a rest
    int duration_class = 5; // index into duration_token_names(); 5 = quarter
    int dots = 0;
    bool chord = false;
    bool tie = false; // tie started on this note
    int staff = 1;    // 1 or 2

    bool operator==(const NoteElem&) const = default;
};

struct Measure {
    std::map<int, std::vector<NoteElem>> voices; // voice number -> notes in document order
    bool operator==(const Measure&) const = default;
};

struct ScoreDoc {
    std::vector<Measure> measures;
    bool operator==(const ScoreDoc&) const = default;
};

struct ParsedScore {
    ScoreDoc doc;
    int skipped_elements = 0; // unsupported constructs dropped with a warning
};

/// Parses the documented MusicXML subset: partwise layout, a single part,
/// pitched/rest notes with type, dots, chord, tie, voice and staff. Flats
/// are normalized to enharmonic sharps. Lyrics and ornaments beyond ties
/// are skipped and counted.
ParsedScore parse_musicxml_subset(const std::string& xml_text);

/// Serializes back to the same subset.
std::string write_musicxml(const ScoreDoc& doc);

using LmxSeq = std::vector<std::string>;

/// Deterministic linearization: measures in order, voices ascending, notes
/// in order. Each note emits optional chord/tie/staff2 markers, the pitch
/// token, the duration token, then one `dot` token per dot. A voice_k
/// marker opens every voice group except a measure's sole voice 1.
LmxSeq linearize(const ScoreDoc& doc);
ScoreDoc delinearize(const LmxSeq& seq);

/// Levenshtein distance at unit costs divided by reference length.
double symbol_error_rate(const LmxSeq& reference, const LmxSeq& hypothesis);

} // namespace smt
