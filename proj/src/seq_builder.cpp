#include "smt/seq_builder.hpp"

#include "smt/errors.hpp"
#include "smt/rng.hpp"

#include <algorithm>
#include <cmath>

namespace smt {

const char* to_string(TaskKind t) {
    switch (t) {
        case TaskKind::OMR: return "OMR";
        case TaskKind::M2A: return "M2A";
        case TaskKind::I2A: return "I2A";
        case TaskKind::AMT: return "AMT";
        case TaskKind::L2I: return "L2I";
        case TaskKind::A2I: return "A2I";
    }
    throw Error("invalid task value");
}

const char* to_string(Direction d) {
    return d == Direction::ImageToAudio ? "I2A" : "A2I";
}

TaskKind task_from_string(std::string_view s) {
    for (TaskKind t : kAllTasks)
        if (s == to_string(t)) return t;
    throw Error("unknown task: " + std::string(s));
}

Direction direction_from_string(std::string_view s) {
    if (s == "I2A") return Direction::ImageToAudio;
    if (s == "A2I") return Direction::AudioToImage;
    throw Error("unknown direction: " + std::string(s) + " (expected I2A or A2I)");
}

Direction direction_of(TaskKind t) {
    switch (t) {
        case TaskKind::OMR:
        case TaskKind::M2A:
        case TaskKind::I2A: return Direction::ImageToAudio;
        case TaskKind::AMT:
        case TaskKind::L2I:
        case TaskKind::A2I: return Direction::AudioToImage;
    }
    throw Error("invalid task value");
}

Modality task_source_modality(TaskKind t) {
    switch (t) {
        case TaskKind::OMR: return Modality::Image;
        case TaskKind::M2A: return Modality::Midi;
        case TaskKind::I2A: return Modality::Image;
        case TaskKind::AMT: return Modality::Audio;
        case TaskKind::L2I: return Modality::Notation;
        case TaskKind::A2I: return Modality::Audio;
    }
    throw Error("invalid task value");
}

Modality task_target_modality(TaskKind t) {
    switch (t) {
        case TaskKind::OMR: return Modality::Notation;
        case TaskKind::M2A: return Modality::Audio;
        case TaskKind::I2A: return Modality::Audio;
        case TaskKind::AMT: return Modality::Midi;
        case TaskKind::L2I: return Modality::Image;
        case TaskKind::A2I: return Modality::Image;
    }
    throw Error("invalid task value");
}

std::size_t length_cap(Modality m, Direction dir) {
    switch (m) {
        case Modality::Audio:
            return dir == Direction::ImageToAudio ? kMaxAudioFramesI2A : kMaxAudioFramesA2I;
        case Modality::Midi: return kMaxMidiTokens;
        default: return 0;
    }
}

TokenGrid wrap_sequence(const TokenGrid& grid, const VocabLayout& layout) {
    const Modality m = grid.modality();
    const bool symbolic = is_symbolic(m);
    if (symbolic && grid.codebooks() != 1)
        throw Error("symbolic grids must have a single codebook before wrapping");
    if (!symbolic && grid.codebooks() != layout.codebooks(m))
        throw Error(std::string("grid codebook count does not match the layout for ") +
                    to_string(m));
    const int out_d = symbolic ? 4 : grid.codebooks();

    TokenGrid out(m, out_d);
    if (symbolic) {
        out.push_uniform(kSosSentinel, kPadSentinel);
        for (std::size_t pos = 0; pos < grid.length(); ++pos)
            out.push_uniform(grid.at(pos, 0), kPadSentinel);
        out.push_uniform(kEosSentinel, kPadSentinel);
    } else {
        out.push_uniform(kSosSentinel, kSosSentinel);
        for (std::size_t pos = 0; pos < grid.length(); ++pos) out.push_bundle(grid.bundle(pos));
        out.push_uniform(kEosSentinel, kEosSentinel);
    }
    return out;
}

std::vector<std::uint32_t> to_global_ids(const TokenGrid& grid, const VocabLayout& layout) {
    const Modality m = grid.modality();
    std::vector<std::uint32_t> ids;
    ids.reserve(grid.entries().size());
    for (std::size_t pos = 0; pos < grid.length(); ++pos) {
        for (int cb = 0; cb < grid.codebooks(); ++cb) {
            std::uint16_t v = grid.at(pos, cb);
            switch (v) {
                case kPadSentinel: ids.push_back(layout.pad()); break;
                case kSepSentinel: ids.push_back(layout.sep()); break;
                case kSosSentinel: ids.push_back(layout.sos(m)); break;
                case kEosSentinel: ids.push_back(layout.eos(m)); break;
                default:
                    // symbolic codebooks 2-4 only ever carry PAD
                    ids.push_back(layout.local_to_global(m, is_symbolic(m) ? 0 : cb, v));
            }
        }
    }
    return ids;
}

namespace {

Slice full_slice(std::size_t len) { return {0, len}; }

Slice random_slice(std::size_t len, std::size_t cap, SplitMix64& rng) {
    if (len <= cap) return full_slice(len);
    std::uint64_t begin = rng.next_below(len - cap + 1);
    return {static_cast<std::size_t>(begin), cap};
}

std::size_t scale_index(std::size_t i, std::size_t from_len, std::size_t to_len) {
    return static_cast<std::size_t>(std::llround(
        static_cast<double>(i) * static_cast<double>(to_len) / static_cast<double>(from_len)));
}

} // namespace

SlicePlan plan_truncation(TaskKind task, std::size_t source_len, std::size_t target_len,
                          std::uint64_t seed) {
    const Direction dir = direction_of(task);
    const Modality src_m = task_source_modality(task);
    const Modality tgt_m = task_target_modality(task);
    const std::size_t src_cap = length_cap(src_m, dir);
    const std::size_t tgt_cap = length_cap(tgt_m, dir);

    SplitMix64 rng(seed);
    SlicePlan plan{full_slice(source_len), full_slice(target_len), false};

    const bool src_time = src_cap > 0;
    const bool tgt_time = tgt_cap > 0;
    const bool src_over = src_time && source_len > src_cap;
    const bool tgt_over = tgt_time && target_len > tgt_cap;

    if (src_time && tgt_time && source_len > 0 && target_len > 0 && (src_over || tgt_over)) {
        // both sides carry time: the tighter side drives, the other follows
        // the same span by proportional index mapping
        const double src_ratio = static_cast<double>(src_cap) / static_cast<double>(source_len);
        const double tgt_ratio = static_cast<double>(tgt_cap) / static_cast<double>(target_len);
        const bool src_drives = src_over && (!tgt_over || src_ratio <= tgt_ratio);
        const std::size_t drv_len = src_drives ? source_len : target_len;
        const std::size_t drv_cap = src_drives ? src_cap : tgt_cap;
        const std::size_t oth_len = src_drives ? target_len : source_len;
        const std::size_t oth_cap = src_drives ? tgt_cap : src_cap;

        Slice drv = random_slice(drv_len, drv_cap, rng);
        Slice oth;
        oth.begin = std::min(scale_index(drv.begin, drv_len, oth_len), oth_len);
        std::size_t mapped_len = scale_index(drv.length, drv_len, oth_len);
        oth.length = std::min({mapped_len, oth_cap, oth_len - oth.begin});
        plan.source = src_drives ? drv : oth;
        plan.target = src_drives ? oth : drv;
    } else {
        if (src_over) plan.source = random_slice(source_len, src_cap, rng);
        if (tgt_over) plan.target = random_slice(target_len, tgt_cap, rng);
    }

    if (src_m == Modality::Image && source_len > kMaxImageBundles) plan.image_over_limit = true;
    if (tgt_m == Modality::Image && target_len > kMaxImageBundles) plan.image_over_limit = true;
    return plan;
}

TruncateResult truncate_pair(const TrainingPair& pair, std::uint64_t seed) {
    if (pair.source.modality() != task_source_modality(pair.task) ||
        pair.target.modality() != task_target_modality(pair.task))
        throw Error(std::string("grid modalities do not match task ") + to_string(pair.task));
    SlicePlan plan = plan_truncation(pair.task, pair.source.length(), pair.target.length(), seed);
    TruncateResult result{
        {pair.source.slice(plan.source.begin, plan.source.length),
         pair.target.slice(plan.target.begin, plan.target.length), pair.task, pair.sample_id},
        plan};
    return result;
}

void CurriculumSchedule::validate() const {
    if (tasks.empty()) throw Error("curriculum schedule has no tasks");
    bool has_initial = false;
    for (const auto& [task, entry] : tasks) {
        if (entry.weight < 0) throw Error("task weights must be non-negative");
        if (entry.introduction_step == 0) has_initial = true;
    }
    if (!has_initial) throw Error("at least one task must be introduced at step 0");
}

CurriculumSchedule default_schedule(Direction dir) {
    CurriculumSchedule s;
    if (dir == Direction::ImageToAudio) {
        s.tasks[TaskKind::OMR] = {0, 1.0};
        s.tasks[TaskKind::M2A] = {15000, 1.0};
        s.tasks[TaskKind::I2A] = {50000, 1.0};
    } else {
        s.tasks[TaskKind::AMT] = {0, 1.0};
        s.tasks[TaskKind::L2I] = {40000, 1.0};
        s.tasks[TaskKind::A2I] = {70000, 1.0};
    }
    return s;
}

std::set<TaskKind> curriculum_active_tasks(long step, const CurriculumSchedule& schedule) {
    std::set<TaskKind> active;
    for (const auto& [task, entry] : schedule.tasks)
        if (step >= entry.introduction_step) active.insert(task);
    return active;
}

std::vector<BatchSlot> sample_batch(long step, const CurriculumSchedule& schedule,
                                    const std::map<TaskKind, std::uint64_t>& dataset_sizes,
                                    int batch, std::uint64_t seed) {
    if (batch <= 0) throw Error("batch size must be positive");
    schedule.validate();
    const auto active = curriculum_active_tasks(step, schedule);

    struct Candidate {
        TaskKind task;
        double weight;
        std::uint64_t size;
    };
    std::vector<Candidate> candidates;
    double total_weight = 0;
    for (TaskKind t : kAllTasks) { // canonical order keeps the draw deterministic
        if (!active.count(t)) continue;
        auto size_it = dataset_sizes.find(t);
        const std::uint64_t size = size_it == dataset_sizes.end() ? 0 : size_it->second;
        const double w = schedule.tasks.at(t).weight;
        if (size == 0 || w <= 0) continue;
        candidates.push_back({t, w, size});
        total_weight += w;
    }
    if (candidates.empty()) throw Error("all active task datasets are empty");

    SplitMix64 rng(seed ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(step) + 1)));
    std::vector<BatchSlot> slots;
    slots.reserve(static_cast<std::size_t>(batch));
    for (int i = 0; i < batch; ++i) {
        double u = rng.next_double() * total_weight;
        const Candidate* chosen = &candidates.back();
        double acc = 0;
        for (const Candidate& c : candidates) {
            acc += c.weight;
            if (u < acc) {
                chosen = &c;
                break;
            }
        }
        slots.push_back({chosen->task, rng.next_below(chosen->size)});
    }
    return slots;
}

std::uint64_t derive_slot_seed(std::uint64_t seed, long step, int slot) {
    SplitMix64 g(seed ^ (0xD1B54A32D192ED03ull * (static_cast<std::uint64_t>(step) + 1)) ^
                 (0x8CB92BA72F3D8DD7ull * (static_cast<std::uint64_t>(slot) + 1)));
    return g.next();
}

} // namespace smt
