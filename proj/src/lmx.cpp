#include "smt/lmx.hpp"

#include "smt/errors.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <array>
#include <sstream>

namespace smt {

namespace {

const std::array<const char*, 12> kChromaticSteps = {"C",  "C#", "D",  "D#", "E",  "F",
                                                     "F#", "G",  "G#", "A",  "A#", "B"};

const std::array<const char*, 13> kDurationNames = {"maxima", "long", "breve", "whole", "half",
                                                    "quarter", "eighth", "16th", "32nd", "64th",
                                                    "128th", "256th", "512th"};

} // namespace

const std::vector<std::string>& pitch_token_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (int s = kMinPitchSemitone; s <= kMaxPitchSemitone; ++s)
            v.push_back(pitch_token_from_semitone(s));
        return v;
    }();
    return names;
}

const std::vector<std::string>& duration_token_names() {
    static const std::vector<std::string> names(kDurationNames.begin(), kDurationNames.end());
    return names;
}

const std::vector<std::string>& notation_vocab() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {"measure", "chord", "tie", "staff2", "dot", "rest"};
        for (int k = 1; k <= kMaxVoice; ++k) v.push_back("voice_" + std::to_string(k));
        for (const auto& p : pitch_token_names()) v.push_back(p);
        for (const auto& d : duration_token_names()) v.push_back(d);
        return v;
    }();
    return names;
}

std::string pitch_token_from_semitone(int semitone) {
    if (semitone < 0 || semitone > 127) throw Error("semitone out of MIDI range");
    return std::string(kChromaticSteps[semitone % 12]) + std::to_string(semitone / 12 - 1);
}

std::optional<int> semitone_from_pitch_token(std::string_view name) {
    if (name.size() < 2) return std::nullopt;
    std::size_t step_len = (name.size() >= 2 && name[1] == '#') ? 2 : 1;
    int step = -1;
    for (int i = 0; i < 12; ++i)
        if (name.substr(0, step_len) == kChromaticSteps[i]) step = i;
    if (step < 0) return std::nullopt;
    int octave = 0;
    auto rest = name.substr(step_len);
    if (rest.empty()) return std::nullopt;
    for (char c : rest) {
        if (c < '0' || c > '9') return std::nullopt;
        octave = octave * 10 + (c - '0');
    }
    int semitone = (octave + 1) * 12 + step;
    if (semitone < kMinPitchSemitone || semitone > kMaxPitchSemitone) return std::nullopt;
    return semitone;
}

std::optional<int> duration_class_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kDurationNames.size(); ++i)
        if (name == kDurationNames[i]) return static_cast<int>(i);
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// MusicXML subset parsing

namespace {

using boost::property_tree::ptree;

int step_offset(const std::string& step) {
    switch (step.empty() ? '?' : step[0]) {
        case 'C': return 0;
        case 'D': return 2;
        case 'E': return 4;
        case 'F': return 5;
        case 'G': return 7;
        case 'A': return 9;
        case 'B': return 11;
        default: throw Error("invalid pitch step: " + step);
    }
}

// Elements we recognise and deliberately do not represent. Signatures and
// layout do not take part in linearization.
bool is_known_structural(const std::string& name) {
    return name == "attributes" || name == "backup" || name == "forward" ||
           name == "direction" || name == "barline" || name == "print" || name == "sound" ||
           name == "harmony" || name == "<xmlattr>" || name == "<xmlcomment>";
}

NoteElem parse_note(const ptree& note, int* voice_out, int* skipped) {
    NoteElem elem;
    bool have_pitch = false, have_type = false;
    int voice = 1;
    for (const auto& [name, child] : note) {
        if (name == "rest") {
            elem.rest = true;
        } else if (name == "pitch") {
            std::string step = child.get<std::string>("step", "");
            int alter = child.get<int>("alter", 0);
            auto octave_node = child.get_optional<int>("octave");
            if (!octave_node) throw Error("pitch lacks an octave element");
            int octave = *octave_node;
            int semitone = (octave + 1) * 12 + step_offset(step) + alter;
            if (semitone < kMinPitchSemitone || semitone > kMaxPitchSemitone)
                throw Error("pitch " + step + std::to_string(octave) +
                            " outside the supported C2..E6 range");
            elem.semitone = semitone;
            have_pitch = true;
        } else if (name == "chord") {
            elem.chord = true;
        } else if (name == "voice") {
            voice = child.get_value<int>();
            if (voice < 1) throw Error("voice numbers must be positive");
            if (voice > kMaxVoice)
                throw UnsupportedFeature("voice number " + std::to_string(voice) +
                                         " exceeds the supported maximum of " +
                                         std::to_string(kMaxVoice));
        } else if (name == "type") {
            auto cls = duration_class_from_name(child.get_value<std::string>());
            if (!cls) throw Error("unknown duration type: " + child.get_value<std::string>());
            elem.duration_class = *cls;
            have_type = true;
        } else if (name == "dot") {
            ++elem.dots;
        } else if (name == "tie") {
            if (child.get<std::string>("<xmlattr>.type", "") == "start") elem.tie = true;
        } else if (name == "staff") {
            elem.staff = child.get_value<int>();
            if (elem.staff != 1 && elem.staff != 2)
                throw UnsupportedFeature("staff " + std::to_string(elem.staff) +
                                         " outside the pianoform range");
        } else if (name == "duration" || name == "stem" || name == "beam" ||
                   name == "accidental" || name == "<xmlattr>") {
            // 'type' carries the duration class; engraving hints are redundant here
        } else if (name == "notations" || name == "lyric" || name == "grace" || name == "cue" ||
                   name == "ornaments") {
            ++*skipped;
        } else {
            ++*skipped;
        }
    }
    if (!elem.rest && !have_pitch) throw Error("note lacks both pitch and rest");
    if (!have_type) throw Error("note lacks a type element");
    *voice_out = voice;
    return elem;
}

} // namespace

ParsedScore parse_musicxml_subset(const std::string& xml_text) {
    ptree root;
    try {
        std::istringstream in(xml_text);
        boost::property_tree::read_xml(in, root,
                                       boost::property_tree::xml_parser::trim_whitespace);
    } catch (const boost::property_tree::xml_parser_error& e) {
        throw ParseError(e.message(), static_cast<int>(e.line()));
    }

    auto partwise = root.get_child_optional("score-partwise");
    if (!partwise) {
        if (root.get_child_optional("score-timewise"))
            throw UnsupportedFeature("timewise scores are not supported, use partwise");
        throw ParseError("document root is not score-partwise", 0);
    }

    ParsedScore result;
    int part_count = 0;
    const ptree* part = nullptr;
    for (const auto& [name, child] : *partwise) {
        if (name != "part") continue;
        ++part_count;
        part = &child;
    }
    if (part_count > 1) throw UnsupportedFeature("multi-part scores are not supported");
    if (part_count == 0) return result;

    for (const auto& [name, measure_node] : *part) {
        if (name != "measure") {
            if (name != "<xmlattr>") ++result.skipped_elements;
            continue;
        }
        Measure measure;
        for (const auto& [elem_name, elem_node] : measure_node) {
            if (elem_name == "note") {
                const bool is_grace = elem_node.get_child_optional("grace").has_value();
                const bool is_cue = elem_node.get_child_optional("cue").has_value();
                if (is_grace || is_cue) {
                    ++result.skipped_elements;
                    continue;
                }
                int voice = 1;
                NoteElem note = parse_note(elem_node, &voice, &result.skipped_elements);
                measure.voices[voice].push_back(note);
            } else if (is_known_structural(elem_name)) {
                // recognised, intentionally unrepresented
            } else {
                ++result.skipped_elements;
            }
        }
        result.doc.measures.push_back(std::move(measure));
    }
    return result;
}

namespace {

void escape_xml(std::string& out, const std::string& text) {
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
}

} // namespace

std::string write_musicxml(const ScoreDoc& doc) {
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<score-partwise version=\"3.1\">\n";
    out += "  <part-list>\n    <score-part id=\"P1\">\n      <part-name>Music</part-name>\n"
           "    </score-part>\n  </part-list>\n";
    out += "  <part id=\"P1\">\n";
    for (std::size_t mi = 0; mi < doc.measures.size(); ++mi) {
        out += "    <measure number=\"" + std::to_string(mi + 1) + "\">\n";
        for (const auto& [voice, notes] : doc.measures[mi].voices) {
            for (const NoteElem& n : notes) {
                out += "      <note>\n";
                if (n.chord) out += "        <chord/>\n";
                if (n.rest) {
                    out += "        <rest/>\n";
                } else {
                    std::string name = pitch_token_from_semitone(n.semitone);
                    bool sharp = name.size() > 1 && name[1] == '#';
                    out += "        <pitch>\n          <step>" + name.substr(0, 1) + "</step>\n";
                    if (sharp) out += "          <alter>1</alter>\n";
                    out += "          <octave>" + std::to_string(n.semitone / 12 - 1) +
                           "</octave>\n        </pitch>\n";
                }
                out += "        <voice>" + std::to_string(voice) + "</voice>\n";
                std::string type;
                escape_xml(type, duration_token_names()[static_cast<std::size_t>(n.duration_class)]);
                out += "        <type>" + type + "</type>\n";
                for (int i = 0; i < n.dots; ++i) out += "        <dot/>\n";
                if (n.tie) out += "        <tie type=\"start\"/>\n";
                out += "        <staff>" + std::to_string(n.staff) + "</staff>\n";
                out += "      </note>\n";
            }
        }
        out += "    </measure>\n";
    }
    out += "  </part>\n</score-partwise>\n";
    return out;
}

// ---------------------------------------------------------------------------
// Linearization

LmxSeq linearize(const ScoreDoc& doc) {
    LmxSeq seq;
    for (const Measure& measure : doc.measures) {
        seq.push_back("measure");
        const bool sole_default_voice =
            measure.voices.size() == 1 && measure.voices.begin()->first == 1;
        for (const auto& [voice, notes] : measure.voices) {
            if (voice < 1) throw Error("voice numbers must be positive");
            if (voice > kMaxVoice)
                throw Error("voice number " + std::to_string(voice) + " outside the vocabulary");
            if (!sole_default_voice) seq.push_back("voice_" + std::to_string(voice));
            for (const NoteElem& n : notes) {
                if (n.chord) seq.push_back("chord");
                if (n.tie) seq.push_back("tie");
                if (n.staff == 2) seq.push_back("staff2");
                else if (n.staff != 1)
                    throw Error("staff " + std::to_string(n.staff) + " outside the vocabulary");
                if (n.rest) {
                    seq.push_back("rest");
                } else {
                    if (n.semitone < kMinPitchSemitone || n.semitone > kMaxPitchSemitone)
                        throw Error("pitch " + pitch_token_from_semitone(n.semitone) +
                                    " outside the vocabulary");
                    seq.push_back(pitch_token_from_semitone(n.semitone));
                }
                if (n.duration_class < 0 ||
                    n.duration_class >= static_cast<int>(duration_token_names().size()))
                    throw Error("duration class " + std::to_string(n.duration_class) +
                                " outside the vocabulary");
                seq.push_back(duration_token_names()[static_cast<std::size_t>(n.duration_class)]);
                for (int i = 0; i < n.dots; ++i) seq.push_back("dot");
            }
        }
    }
    return seq;
}

ScoreDoc delinearize(const LmxSeq& seq) {
    ScoreDoc doc;
    Measure* measure = nullptr;
    std::vector<NoteElem>* voice_notes = nullptr;
    NoteElem pending;       // marker/pitch state for the note under construction
    bool have_pitch = false; // pitch seen, duration still missing
    bool have_markers = false;
    NoteElem* last_complete = nullptr;

    auto require_no_open_note = [&](std::size_t i) {
        if (have_pitch) throw GrammarError("pitch without a duration", i);
        if (have_markers) throw GrammarError("dangling note markers", i);
    };

    for (std::size_t i = 0; i < seq.size(); ++i) {
        const std::string& tok = seq[i];
        if (tok == "measure") {
            require_no_open_note(i);
            doc.measures.emplace_back();
            measure = &doc.measures.back();
            voice_notes = nullptr;
            last_complete = nullptr;
            continue;
        }
        if (!measure) throw GrammarError("token before the first measure", i);

        if (tok.rfind("voice_", 0) == 0) {
            require_no_open_note(i);
            int v = 0;
            for (char c : tok.substr(6)) {
                if (c < '0' || c > '9') throw GrammarError("unknown token: " + tok, i);
                v = v * 10 + (c - '0');
            }
            if (v < 1 || v > kMaxVoice) throw GrammarError("unknown token: " + tok, i);
            voice_notes = &measure->voices[v];
            last_complete = nullptr;
            continue;
        }
        if (tok == "chord" || tok == "tie" || tok == "staff2") {
            if (have_pitch) throw GrammarError("marker after pitch: " + tok, i);
            if (tok == "chord") pending.chord = true;
            if (tok == "tie") pending.tie = true;
            if (tok == "staff2") pending.staff = 2;
            have_markers = true;
            continue;
        }
        if (tok == "dot") {
            if (!last_complete || have_pitch || have_markers)
                throw GrammarError("dot without a completed note", i);
            ++last_complete->dots;
            continue;
        }
        if (tok == "rest" || semitone_from_pitch_token(tok)) {
            if (have_pitch) throw GrammarError("pitch without a duration", i);
            if (tok == "rest") {
                pending.rest = true;
            } else {
                pending.semitone = *semitone_from_pitch_token(tok);
            }
            have_pitch = true;
            continue;
        }
        if (auto cls = duration_class_from_name(tok)) {
            if (!have_pitch) throw GrammarError("duration with no preceding pitch", i);
            pending.duration_class = *cls;
            if (!voice_notes) voice_notes = &measure->voices[1];
            voice_notes->push_back(pending);
            last_complete = &voice_notes->back();
            pending = NoteElem{};
            have_pitch = have_markers = false;
            continue;
        }
        throw GrammarError("unknown token: " + tok, i);
    }
    if (have_pitch || have_markers)
        throw GrammarError("unterminated note at end of sequence", seq.empty() ? 0 : seq.size() - 1);
    return doc;
}

double symbol_error_rate(const LmxSeq& reference, const LmxSeq& hypothesis) {
    if (reference.empty()) throw Error("reference sequence must be non-empty");
    const std::size_t n = reference.size(), m = hypothesis.size();
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t sub = prev[j - 1] + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return static_cast<double>(prev[m]) / static_cast<double>(n);
}

} // namespace smt
