#pragma once

#include <bitset>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace smt {

inline constexpr double kTickMs = 10.0; // quantized time marker interval

struct Note {
    double onset_ms = 0;
    double offset_ms = 0;
    int pitch = 60;   // MIDI number 0..127
    int program = 0;  // 0..127

    bool operator==(const Note&) const = default;
};

/// Timed note events, sorted by (onset, pitch), offset strictly after onset.
struct NoteList {
    std::vector<Note> notes;

    void validate() const; // throws Error on invariant violation
    void sort();
    bool operator==(const NoteList&) const = default;
};

enum class EventKind : std::uint8_t { Time, Program, On, Off, Pitch };

struct EventTok {
    EventKind kind;
    int value = 0; // tick for Time, program / pitch number otherwise, unused for On/Off

    bool operator==(const EventTok&) const = default;
};

using EventSeq = std::vector<EventTok>;

std::string event_token_name(const EventTok& tok);
EventTok event_token_from_name(std::string_view name);

/// Ordered Midi vocabulary: on, off, pitch_0..127, program_0..127,
/// time_0..time_{max_tick}.
std::vector<std::string> default_midi_vocab(int max_tick = 2047);

/// Position of a token in default_midi_vocab, computed without a lookup.
int midi_token_local_index(const EventTok& tok, int max_tick = 2047);
EventTok midi_token_from_local_index(int index, int max_tick = 2047);

struct EncodeResult {
    EventSeq events;
    int dropped_zero_length = 0; // notes that quantized to zero duration
};

/// 10 ms round-half-up quantization. Per tick: one time token, a program
/// token when the running program changes, then off events, then on events,
/// each in ascending pitch order.
EncodeResult encode_midi_like(const NoteList& notes);

struct DecodeResult {
    NoteList notes;
    int repairs = 0; // dangling ons closed at the final time, offs without a matching on
};

DecodeResult decode_midi_like(const EventSeq& seq);

/// Binary time x pitch activity matrix.
class PianoRoll {
public:
    PianoRoll() = default;
    explicit PianoRoll(std::size_t frames) : rows_(frames) {}

    std::size_t frames() const { return rows_.size(); }
    bool active(std::size_t frame, int pitch) const { return rows_[frame][static_cast<std::size_t>(pitch)]; }
    void set(std::size_t frame, int pitch) { rows_[frame][static_cast<std::size_t>(pitch)] = true; }
    const std::bitset<128>& frame(std::size_t i) const { return rows_[i]; }
    std::bitset<128>& frame(std::size_t i) { return rows_[i]; }

    bool operator==(const PianoRoll&) const = default;

private:
    std::vector<std::bitset<128>> rows_;
};

/// Cell (t, p) is set iff some pitch-p note sounds during [t*frame, (t+1)*frame).
/// Frame count is ceil(max offset / frame); empty input gives an empty roll.
PianoRoll to_piano_roll(const NoteList& notes, double frame_ms);

} // namespace smt
