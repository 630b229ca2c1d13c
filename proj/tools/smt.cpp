#include "smt/commands.hpp"
#include "smt/errors.hpp"
#include "smt/io.hpp"

#include <CLI11.hpp>

#include <functional>
#include <string>
#include <vector>

namespace {

void add_common(CLI::App* cmd, smt::JobConfig& config) {
    cmd->add_option("--seed", config.seed, "deterministic seed")->default_val(0);
    cmd->add_option("-j,--jobs", config.jobs, "file-level parallelism")->default_val(1);
    cmd->add_flag("--keep-going", config.keep_going, "continue past per-file failures");
    cmd->add_flag("--schema-check", config.schema_check, "validate input schema headers");
}

void add_thresholds(CLI::App* cmd, smt::FilterThresholds& t) {
    cmd->add_option("--min-video-intensity", t.min_video_intensity);
    cmd->add_option("--max-pixel-anomaly", t.max_pixel_anomaly);
    cmd->add_option("--min-height", t.min_height);
    cmd->add_option("--max-height", t.max_height);
    cmd->add_option("--max-height-z", t.max_height_z);
    cmd->add_option("--max-overlap", t.max_overlap);
    cmd->add_option("--min-duration", t.min_duration);
    cmd->add_option("--max-duration", t.max_duration);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"smt: cross-modal music token tooling"};
    app.set_version_flag("--version", smt::kToolVersion);
    app.require_subcommand(1);

    smt::JobConfig config;
    std::string direction;
    std::vector<std::string> task_index_args;
    std::function<int(const smt::JobConfig&)> dispatch;

    auto* tokenize = app.add_subcommand("tokenize", "MusicXML or note lists to token files");
    tokenize->add_option("--kind", config.kind, "musicxml|notes")->required();
    tokenize->add_option("-i,--input", config.inputs, "input files or directories")->required();
    tokenize->add_option("-o,--output", config.output, "output directory")->required();
    add_common(tokenize, config);
    tokenize->callback([&] { dispatch = smt::cmd_tokenize; });

    auto* detokenize = app.add_subcommand("detokenize", "token files back to documents");
    detokenize->add_option("--kind", config.kind, "lmx|events")->required();
    detokenize->add_option("-i,--input", config.inputs, "input JSONL files")->required();
    detokenize->add_option("-o,--output", config.output, "output directory")->required();
    add_common(detokenize, config);
    detokenize->callback([&] { dispatch = smt::cmd_detokenize; });

    auto* segment = app.add_subcommand("segment", "slide segmentation and filter scoring");
    segment->add_option("-i,--input", config.inputs, "per-video JSONL")->required();
    segment->add_option("-o,--output", config.output, "manifest path")->required();
    add_common(segment, config);
    add_thresholds(segment, config.thresholds);
    segment->callback([&] { dispatch = smt::cmd_segment; });

    auto* filter = app.add_subcommand("filter", "apply thresholds to a manifest");
    filter->add_option("-i,--input", config.inputs, "ytsv-manifest JSONL")->required();
    filter->add_option("-o,--output", config.output, "filtered manifest path")->required();
    add_common(filter, config);
    add_thresholds(filter, config.thresholds);
    filter->callback([&] { dispatch = smt::cmd_filter; });

    auto* evaluate = app.add_subcommand("evaluate", "metric suite over paired inputs");
    evaluate->add_option("--reference", config.reference, "reference JSONL")->required();
    evaluate->add_option("--hypothesis", config.hypothesis, "hypothesis JSONL")->required();
    evaluate->add_option("--reference-emb", config.reference_emb, "reference EMB1 file");
    evaluate->add_option("--hypothesis-emb", config.hypothesis_emb, "hypothesis EMB1 file");
    evaluate->add_flag("--dtw", config.use_dtw, "DTW-align hypothesis notes before onset F1");
    evaluate->add_option("-o,--output", config.output, "report JSON path")->required();
    add_common(evaluate, config);
    evaluate->callback([&] { dispatch = smt::cmd_evaluate; });

    auto* batches = app.add_subcommand("build-batches", "curriculum batch manifests");
    batches->add_option("--direction", direction, "I2A|A2I")->required();
    batches
        ->add_option("--task", task_index_args,
                     "TASK=index.jsonl dataset index, repeatable")
        ->required();
    batches->add_option("--steps-begin", config.step_begin)->default_val(0);
    batches->add_option("--steps-end", config.step_end)->required();
    batches->add_option("--batch", config.batch)->default_val(24);
    batches->add_option("-o,--output", config.output, "manifest path")->required();
    add_common(batches, config);
    batches->callback([&] { dispatch = smt::cmd_build_batches; });

    auto* vocab = app.add_subcommand("vocab", "emit the unified vocabulary layout");
    vocab->add_option("-o,--output", config.output, "layout JSON path (stdout if omitted)");
    add_common(vocab, config);
    vocab->callback([&] { dispatch = smt::cmd_vocab; });

    CLI11_PARSE(app, argc, argv);

    try {
        config.command = app.get_subcommands().front()->get_name();
        if (!direction.empty()) config.direction = smt::direction_from_string(direction);
        for (const std::string& arg : task_index_args) {
            auto eq = arg.find('=');
            if (eq == std::string::npos)
                throw smt::Error("--task expects TASK=index.jsonl, got: " + arg);
            config.task_indexes[smt::task_from_string(arg.substr(0, eq))] = arg.substr(eq + 1);
        }
        return dispatch(config);
    } catch (const std::exception& e) {
        smt::log(smt::LogLevel::Error, e.what());
        return smt::kExitFailure;
    }
}
