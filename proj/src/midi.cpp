#include "smt/midi.hpp"

#include "smt/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>

namespace smt {

void NoteList::validate() const {
    const Note* prev = nullptr;
    for (const Note& n : notes) {
        if (n.pitch < 0 || n.pitch > 127)
            throw Error("pitch " + std::to_string(n.pitch) + " outside 0..127");
        if (n.program < 0 || n.program > 127)
            throw Error("program " + std::to_string(n.program) + " outside 0..127");
        if (!(n.offset_ms > n.onset_ms)) throw Error("note offset must be after its onset");
        if (prev && (prev->onset_ms > n.onset_ms ||
                     (prev->onset_ms == n.onset_ms && prev->pitch > n.pitch)))
            throw Error("note list must be sorted by (onset, pitch)");
        prev = &n;
    }
}

void NoteList::sort() {
    std::stable_sort(notes.begin(), notes.end(), [](const Note& a, const Note& b) {
        if (a.onset_ms != b.onset_ms) return a.onset_ms < b.onset_ms;
        return a.pitch < b.pitch;
    });
}

std::string event_token_name(const EventTok& tok) {
    switch (tok.kind) {
        case EventKind::Time: return "time_" + std::to_string(tok.value);
        case EventKind::Program: return "program_" + std::to_string(tok.value);
        case EventKind::On: return "on";
        case EventKind::Off: return "off";
        case EventKind::Pitch: return "pitch_" + std::to_string(tok.value);
    }
    throw Error("invalid event token");
}

EventTok event_token_from_name(std::string_view name) {
    if (name == "on") return {EventKind::On, 0};
    if (name == "off") return {EventKind::Off, 0};
    auto parse_suffix = [&](std::string_view prefix, EventKind kind) -> std::optional<EventTok> {
        if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
        int value = 0;
        auto digits = name.substr(prefix.size());
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
        if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
        return EventTok{kind, value};
    };
    for (auto [prefix, kind] : {std::pair<std::string_view, EventKind>{"time_", EventKind::Time},
                                {"program_", EventKind::Program},
                                {"pitch_", EventKind::Pitch}}) {
        if (auto tok = parse_suffix(prefix, kind)) return *tok;
    }
    throw Error("unknown MIDI event token: " + std::string(name));
}

std::vector<std::string> default_midi_vocab(int max_tick) {
    std::vector<std::string> v = {"on", "off"};
    for (int p = 0; p < 128; ++p) v.push_back("pitch_" + std::to_string(p));
    for (int p = 0; p < 128; ++p) v.push_back("program_" + std::to_string(p));
    for (int t = 0; t <= max_tick; ++t) v.push_back("time_" + std::to_string(t));
    return v;
}

int midi_token_local_index(const EventTok& tok, int max_tick) {
    switch (tok.kind) {
        case EventKind::On: return 0;
        case EventKind::Off: return 1;
        case EventKind::Pitch:
            if (tok.value < 0 || tok.value > 127) throw Error("pitch value outside 0..127");
            return 2 + tok.value;
        case EventKind::Program:
            if (tok.value < 0 || tok.value > 127) throw Error("program value outside 0..127");
            return 130 + tok.value;
        case EventKind::Time:
            if (tok.value < 0 || tok.value > max_tick)
                throw Error("time tick " + std::to_string(tok.value) +
                            " outside the vocabulary (max " + std::to_string(max_tick) + ")");
            return 258 + tok.value;
    }
    throw Error("invalid event token");
}

EventTok midi_token_from_local_index(int index, int max_tick) {
    if (index == 0) return {EventKind::On, 0};
    if (index == 1) return {EventKind::Off, 0};
    if (index < 130) return {EventKind::Pitch, index - 2};
    if (index < 258) return {EventKind::Program, index - 130};
    if (index < 259 + max_tick) return {EventKind::Time, index - 258};
    throw Error("midi token index " + std::to_string(index) + " outside the vocabulary");
}

namespace {

long quantize_tick(double ms) {
    return static_cast<long>(std::floor(ms / kTickMs + 0.5)); // round half up
}

} // namespace

EncodeResult encode_midi_like(const NoteList& notes) {
    notes.validate();
    EncodeResult result;

    struct TickEvent {
        int program;
        bool is_on;
        int pitch;
    };
    std::map<long, std::vector<TickEvent>> by_tick;
    for (const Note& n : notes.notes) {
        long on = quantize_tick(n.onset_ms), off = quantize_tick(n.offset_ms);
        if (on == off) {
            ++result.dropped_zero_length;
            continue;
        }
        by_tick[on].push_back({n.program, true, n.pitch});
        by_tick[off].push_back({n.program, false, n.pitch});
    }

    int current_program = -1;
    for (auto& [tick, events] : by_tick) {
        result.events.push_back({EventKind::Time, static_cast<int>(tick)});
        // program groups ascending; offs before ons inside a group, by pitch
        std::stable_sort(events.begin(), events.end(), [](const TickEvent& a, const TickEvent& b) {
            if (a.program != b.program) return a.program < b.program;
            if (a.is_on != b.is_on) return !a.is_on;
            return a.pitch < b.pitch;
        });
        for (const TickEvent& e : events) {
            if (e.program != current_program) {
                result.events.push_back({EventKind::Program, e.program});
                current_program = e.program;
            }
            result.events.push_back({e.is_on ? EventKind::On : EventKind::Off, 0});
            result.events.push_back({EventKind::Pitch, e.pitch});
        }
    }
    return result;
}

DecodeResult decode_midi_like(const EventSeq& seq) {
    DecodeResult result;
    long current_tick = 0, last_tick = 0;
    int current_program = 0;
    bool seen_time = false;
    enum class Expect { Any, PitchAfterOn, PitchAfterOff };
    Expect expect = Expect::Any;

    // (pitch, program) -> onset tick of the open note
    std::map<std::pair<int, int>, long> open;

    auto close_note = [&](int pitch, int program, long onset, long offset) {
        result.notes.notes.push_back({static_cast<double>(onset) * kTickMs,
                                      static_cast<double>(offset) * kTickMs, pitch, program});
    };

    for (std::size_t i = 0; i < seq.size(); ++i) {
        const EventTok& tok = seq[i];
        if (expect != Expect::Any && tok.kind != EventKind::Pitch)
            throw GrammarError("on/off must be followed by a pitch token", i);
        switch (tok.kind) {
            case EventKind::Time:
                if (seen_time && tok.value < current_tick)
                    throw GrammarError("time tokens must be non-decreasing", i);
                current_tick = tok.value;
                last_tick = std::max(last_tick, current_tick);
                seen_time = true;
                break;
            case EventKind::Program:
                if (tok.value < 0 || tok.value > 127)
                    throw GrammarError("program value outside 0..127", i);
                current_program = tok.value;
                break;
            case EventKind::On:
                if (!seen_time) throw GrammarError("event before any time token", i);
                expect = Expect::PitchAfterOn;
                break;
            case EventKind::Off:
                if (!seen_time) throw GrammarError("event before any time token", i);
                expect = Expect::PitchAfterOff;
                break;
            case EventKind::Pitch: {
                if (expect == Expect::Any)
                    throw GrammarError("pitch token without a preceding on/off", i);
                if (tok.value < 0 || tok.value > 127)
                    throw GrammarError("pitch value outside 0..127", i);
                auto key = std::make_pair(tok.value, current_program);
                if (expect == Expect::PitchAfterOn) {
                    if (auto it = open.find(key); it != open.end()) {
                        // re-articulation without an off: close the running note
                        if (current_tick > it->second)
                            close_note(key.first, key.second, it->second, current_tick);
                        ++result.repairs;
                        open.erase(it);
                    }
                    open[key] = current_tick;
                } else {
                    auto it = open.find(key);
                    if (it == open.end()) {
                        ++result.repairs; // off for an inactive pitch
                    } else {
                        if (current_tick > it->second)
                            close_note(key.first, key.second, it->second, current_tick);
                        else
                            ++result.repairs; // zero-length after quantization
                        open.erase(it);
                    }
                }
                expect = Expect::Any;
                break;
            }
        }
    }
    if (expect != Expect::Any)
        throw GrammarError("sequence ends inside an on/off event", seq.empty() ? 0 : seq.size() - 1);

    // dangling ons close at the final time token
    for (const auto& [key, onset] : open) {
        ++result.repairs;
        if (last_tick > onset) close_note(key.first, key.second, onset, last_tick);
    }
    result.notes.sort();
    return result;
}

PianoRoll to_piano_roll(const NoteList& notes, double frame_ms) {
    if (!(frame_ms > 0)) throw Error("frame length must be positive");
    double max_offset = 0;
    for (const Note& n : notes.notes) max_offset = std::max(max_offset, n.offset_ms);
    const auto frames = static_cast<std::size_t>(std::ceil(max_offset / frame_ms));
    PianoRoll roll(frames);
    for (const Note& n : notes.notes) {
        auto first = static_cast<std::size_t>(std::floor(n.onset_ms / frame_ms));
        for (std::size_t t = first; t < frames; ++t) {
            double window_begin = static_cast<double>(t) * frame_ms;
            if (window_begin >= n.offset_ms) break;
            if (n.onset_ms < window_begin + frame_ms) roll.set(t, n.pitch);
        }
    }
    return roll;
}

} // namespace smt
