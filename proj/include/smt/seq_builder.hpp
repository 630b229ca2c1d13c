#pragma once

#include "smt/token_grid.hpp"
#include "smt/vocab.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace smt {

enum class TaskKind : std::uint8_t { OMR, M2A, I2A, AMT, L2I, A2I };
enum class Direction : std::uint8_t { ImageToAudio, AudioToImage };

inline constexpr std::array<TaskKind, 6> kAllTasks = {TaskKind::OMR, TaskKind::M2A, TaskKind::I2A,
                                                      TaskKind::AMT, TaskKind::L2I, TaskKind::A2I};

const char* to_string(TaskKind t);
const char* to_string(Direction d);
TaskKind task_from_string(std::string_view s);
Direction direction_from_string(std::string_view s);

Direction direction_of(TaskKind t);
Modality task_source_modality(TaskKind t);
Modality task_target_modality(TaskKind t);

// Sequence-length caps during training. Audio is capped at 20 s of frames in
// the image-to-audio direction and 10 s in the audio-to-image direction;
// MIDI at 1000 tokens either way. Images are never sliced; grids beyond
// 1000 bundles (256,000 pixels) are flagged instead.
inline constexpr std::size_t kMaxAudioFramesI2A = 1723;
inline constexpr std::size_t kMaxAudioFramesA2I = 862;
inline constexpr std::size_t kMaxMidiTokens = 1000;
inline constexpr std::size_t kMaxImageBundles = 1000;

std::size_t length_cap(Modality m, Direction dir); // 0 = uncapped

/// Adds SOS/EOS framing. Symbolic grids widen from d=1 to d=4 with PAD in
/// codebooks 2-4 of every bundle; codec grids keep d=4 and repeat the
/// special across the bundle.
TokenGrid wrap_sequence(const TokenGrid& grid, const VocabLayout& layout);

/// Maps a (possibly wrapped) grid to flat global ids, row-major.
std::vector<std::uint32_t> to_global_ids(const TokenGrid& grid, const VocabLayout& layout);

struct TrainingPair {
    TokenGrid source;
    TokenGrid target;
    TaskKind task;
    std::string sample_id;
};

struct Slice {
    std::size_t begin = 0;
    std::size_t length = 0;
    bool operator==(const Slice&) const = default;
};

struct SlicePlan {
    Slice source;
    Slice target;
    bool image_over_limit = false;
};

/// Decides truncation slices from lengths alone. Time-based sides (audio,
/// MIDI) are sliced uniformly at random over valid start offsets; when both
/// sides are time-based the tighter side drives and the other follows by
/// proportional index mapping. Image and notation sides pass through.
SlicePlan plan_truncation(TaskKind task, std::size_t source_len, std::size_t target_len,
                          std::uint64_t seed);

struct TruncateResult {
    TrainingPair pair;
    SlicePlan plan;
};

TruncateResult truncate_pair(const TrainingPair& pair, std::uint64_t seed);

struct CurriculumEntry {
    long introduction_step = 0;
    double weight = 1.0;
};

struct CurriculumSchedule {
    std::map<TaskKind, CurriculumEntry> tasks;

    void validate() const; // at least one task introduced at step 0
};

/// Task introduction steps used for training: OMR/M2A/I2A at 0/15k/50k,
/// AMT/L2I/A2I at 0/40k/70k, equal weights.
CurriculumSchedule default_schedule(Direction dir);

std::set<TaskKind> curriculum_active_tasks(long step, const CurriculumSchedule& schedule);

struct BatchSlot {
    TaskKind task;
    std::uint64_t sample_index;
    bool operator==(const BatchSlot&) const = default;
};

/// Draws `batch` slots independently: the task with probability
/// weight / sum of active weights, the sample uniformly over that task's
/// dataset. Fully determined by (step, seed).
std::vector<BatchSlot> sample_batch(long step, const CurriculumSchedule& schedule,
                                    const std::map<TaskKind, std::uint64_t>& dataset_sizes,
                                    int batch, std::uint64_t seed);

/// Per-slot stream for truncation offsets inside a batch manifest.
std::uint64_t derive_slot_seed(std::uint64_t seed, long step, int slot);

} // namespace smt
