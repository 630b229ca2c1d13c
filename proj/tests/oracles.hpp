// Independent brute-force oracles for property and acceptance tests. These
// deliberately take different algorithmic routes than the library code they
// check.
#pragma once

#include "smt/lmx.hpp"
#include "smt/metrics.hpp"
#include "smt/midi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace smt::oracle {

// Minimum total frame cost over every monotone path, by plain recursion over
// the step set {(1,0),(0,1),(1,1)}. Exponential; use only on tiny rolls.
inline double dtw_all_paths_cost(const PianoRoll& ref, const PianoRoll& est) {
    const auto R = ref.frames(), E = est.frames();
    auto cell = [&](std::size_t i, std::size_t j) {
        const auto& a = ref.frame(i);
        const auto& b = est.frame(j);
        const std::size_t total = a.count() + b.count();
        if (total == 0) return 0.0;
        return 1.0 - 2.0 * static_cast<double>((a & b).count()) / static_cast<double>(total);
    };
    std::function<double(std::size_t, std::size_t)> best = [&](std::size_t i,
                                                               std::size_t j) -> double {
        const double c = cell(i, j);
        if (i == 0 && j == 0) return c;
        double sub = std::numeric_limits<double>::infinity();
        if (i > 0 && j > 0) sub = std::min(sub, best(i - 1, j - 1));
        if (i > 0) sub = std::min(sub, best(i - 1, j));
        if (j > 0) sub = std::min(sub, best(i, j - 1));
        return c + sub;
    };
    return best(R - 1, E - 1);
}

// Maximum-cardinality onset matching by exhaustive search over assignments.
inline int max_matching_exhaustive(const NoteList& ref, const NoteList& est, double tol) {
    const auto& rn = ref.notes;
    const auto& en = est.notes;
    std::vector<char> used(en.size(), 0);
    std::function<int(std::size_t)> go = [&](std::size_t i) -> int {
        if (i == rn.size()) return 0;
        int best = go(i + 1); // leave ref note i unmatched
        for (std::size_t j = 0; j < en.size(); ++j) {
            if (used[j] || rn[i].pitch != en[j].pitch ||
                std::abs(rn[i].onset_ms - en[j].onset_ms) > tol)
                continue;
            used[j] = 1;
            best = std::max(best, 1 + go(i + 1));
            used[j] = 0;
        }
        return best;
    };
    return go(0);
}

// Optimal 1-D transport by monotone mass coupling (exact for |i-j| costs),
// structurally unrelated to the CDF identity used by the library.
inline double transport_1d(std::vector<double> a, std::vector<double> b) {
    auto normalize = [](std::vector<double>& v) {
        double total = 0;
        for (double x : v) total += x;
        if (total <= 0)
            std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
        else
            for (double& x : v) x /= total;
    };
    normalize(a);
    normalize(b);
    double cost = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double moved = std::min(a[i], b[j]);
        cost += moved * std::abs(static_cast<double>(i) - static_cast<double>(j));
        a[i] -= moved;
        b[j] -= moved;
        if (a[i] <= 1e-15) ++i;
        if (j < b.size() && b[j] <= 1e-15) ++j;
    }
    return cost;
}

// Sounding-frame counts per pitch measured millisecond by millisecond;
// valid for integer-ms note times and integer-ms frames.
inline std::vector<long> roll_column_sums_per_ms(const NoteList& notes, long frame_ms,
                                                 std::size_t frames) {
    std::vector<long> sums(128, 0);
    for (int pitch = 0; pitch < 128; ++pitch) {
        for (std::size_t t = 0; t < frames; ++t) {
            bool active = false;
            for (long m = static_cast<long>(t) * frame_ms;
                 m < static_cast<long>(t + 1) * frame_ms && !active; ++m) {
                for (const Note& n : notes.notes)
                    if (n.pitch == pitch && n.onset_ms <= m && m < n.offset_ms) {
                        active = true;
                        break;
                    }
            }
            if (active) ++sums[static_cast<std::size_t>(pitch)];
        }
    }
    return sums;
}

// ---------------------------------------------------------------------------
// Random generators

inline PianoRoll random_roll(std::mt19937& rng, std::size_t max_frames, int max_pitches = 4) {
    std::uniform_int_distribution<std::size_t> frames_dist(1, max_frames);
    std::uniform_int_distribution<int> pitch_dist(55, 70);
    std::uniform_int_distribution<int> count_dist(0, max_pitches);
    PianoRoll roll(frames_dist(rng));
    for (std::size_t t = 0; t < roll.frames(); ++t) {
        const int count = count_dist(rng);
        for (int k = 0; k < count; ++k) roll.set(t, pitch_dist(rng));
    }
    return roll;
}

inline NoteList random_notes(std::mt19937& rng, int max_notes, bool grid_aligned) {
    std::uniform_int_distribution<int> count_dist(0, max_notes);
    std::uniform_int_distribution<int> pitch_dist(40, 90);
    std::uniform_int_distribution<int> program_dist(0, 3);
    std::uniform_int_distribution<long> onset_dist(0, 1900);
    std::uniform_int_distribution<long> len_dist(2, 80);
    NoteList list;
    const int count = count_dist(rng);
    for (int i = 0; i < count; ++i) {
        Note n;
        n.pitch = pitch_dist(rng);
        n.program = program_dist(rng);
        long onset = onset_dist(rng), len = len_dist(rng);
        if (grid_aligned) {
            n.onset_ms = static_cast<double>(onset * 10);
            n.offset_ms = static_cast<double>((onset + len) * 10);
        } else {
            n.onset_ms = static_cast<double>(onset);
            n.offset_ms = static_cast<double>(onset + len * 10);
        }
        // same-pitch overlap is not expressible in on/off events; nudge apart
        bool overlaps = false;
        for (const Note& other : list.notes)
            if (other.pitch == n.pitch && other.program == n.program &&
                n.onset_ms < other.offset_ms + 10 && other.onset_ms < n.offset_ms + 10)
                overlaps = true;
        if (!overlaps) list.notes.push_back(n);
    }
    list.sort();
    return list;
}

inline ScoreDoc random_score_doc(std::mt19937& rng) {
    std::uniform_int_distribution<int> measures_dist(0, 4);
    std::uniform_int_distribution<int> voices_dist(1, 2);
    std::uniform_int_distribution<int> notes_dist(0, 3);
    std::uniform_int_distribution<int> voice_number_dist(1, 4);
    std::uniform_int_distribution<int> pitch_dist(kMinPitchSemitone, kMaxPitchSemitone);
    std::uniform_int_distribution<int> duration_dist(0, 12);
    std::uniform_int_distribution<int> dots_dist(0, 2);
    std::uniform_int_distribution<int> flag_dist(0, 9);

    ScoreDoc doc;
    const int measures = measures_dist(rng);
    for (int m = 0; m < measures; ++m) {
        Measure measure;
        const int voices = voices_dist(rng);
        int voice_number = 0;
        for (int v = 0; v < voices; ++v) {
            voice_number += voice_number_dist(rng); // strictly increasing keys
            const int count = notes_dist(rng);
            if (count == 0) continue; // an empty voice list represents nothing
            auto& notes = measure.voices[voice_number];
            for (int k = 0; k < count; ++k) {
                NoteElem n;
                n.rest = flag_dist(rng) == 0;
                if (!n.rest) n.semitone = pitch_dist(rng);
                n.duration_class = duration_dist(rng);
                n.dots = dots_dist(rng);
                n.chord = !n.rest && k > 0 && flag_dist(rng) < 2;
                n.tie = !n.rest && flag_dist(rng) < 2;
                n.staff = flag_dist(rng) < 3 ? 2 : 1;
                notes.push_back(n);
            }
        }
        doc.measures.push_back(std::move(measure));
    }
    return doc;
}

inline Histogram random_histogram(std::mt19937& rng, const std::vector<std::string>& bins) {
    std::uniform_real_distribution<double> mass_dist(0.0, 10.0);
    Histogram h{bins, {}};
    h.counts.resize(bins.size());
    for (auto& c : h.counts) c = mass_dist(rng);
    return h;
}

} // namespace smt::oracle
