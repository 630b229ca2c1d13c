#pragma once

#include "smt/seq_builder.hpp"
#include "smt/ytsv.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace smt {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1; // some inputs failed under --keep-going
inline constexpr int kExitFailure = 2;

struct JobConfig {
    std::string command;
    std::vector<std::filesystem::path> inputs;
    std::filesystem::path output;
    std::uint64_t seed = 0;
    std::optional<Direction> direction;
    int jobs = 1;
    bool keep_going = false;
    bool schema_check = false;

    std::string kind; // tokenize: musicxml|notes; detokenize: lmx|events

    std::filesystem::path reference; // evaluate
    std::filesystem::path hypothesis;
    std::filesystem::path reference_emb;
    std::filesystem::path hypothesis_emb;
    bool use_dtw = false;

    long step_begin = 0; // build-batches, [begin, end)
    long step_end = 1;
    int batch = 24;
    std::map<TaskKind, std::filesystem::path> task_indexes;

    FilterThresholds thresholds;
};

int cmd_tokenize(const JobConfig& config);
int cmd_detokenize(const JobConfig& config);
int cmd_segment(const JobConfig& config);
int cmd_filter(const JobConfig& config);
int cmd_evaluate(const JobConfig& config);
int cmd_build_batches(const JobConfig& config);
int cmd_vocab(const JobConfig& config);

} // namespace smt
