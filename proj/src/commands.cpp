#include "smt/commands.hpp"

#include "smt/codec.hpp"
#include "smt/errors.hpp"
#include "smt/io.hpp"
#include "smt/lmx.hpp"
#include "smt/metrics.hpp"
#include "smt/midi.hpp"
#include "smt/rng.hpp"
#include "smt/token_grid.hpp"
#include "smt/vocab.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

namespace smt {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json config_echo(const JobConfig& config) {
    ordered_json echo;
    echo["command"] = config.command;
    echo["seed"] = config.seed;
    if (config.direction) echo["direction"] = to_string(*config.direction);
    echo["jobs"] = config.jobs;
    echo["keep_going"] = config.keep_going;
    if (!config.kind.empty()) echo["kind"] = config.kind;
    if (config.command == "segment" || config.command == "filter") {
        const FilterThresholds& t = config.thresholds;
        echo["thresholds"] = {{"min_video_intensity", t.min_video_intensity},
                              {"max_pixel_anomaly", t.max_pixel_anomaly},
                              {"min_height", t.min_height},
                              {"max_height", t.max_height},
                              {"max_height_z", t.max_height_z},
                              {"max_overlap", t.max_overlap},
                              {"min_duration", t.min_duration},
                              {"max_duration", t.max_duration}};
    }
    if (config.command == "build-batches") {
        echo["batch"] = config.batch;
        echo["steps"] = {config.step_begin, config.step_end};
    }
    if (config.command == "evaluate") echo["dtw"] = config.use_dtw;
    return echo;
}

ordered_json header_line(const char* schema, const JobConfig& config) {
    ordered_json header;
    header["schema"] = schema;
    header["tool_version"] = kToolVersion;
    header["config_echo"] = config_echo(config);
    return header;
}

struct JsonlDoc {
    std::optional<ordered_json> header;
    std::vector<std::pair<std::size_t, ordered_json>> records; // (1-based line, value)
};

JsonlDoc read_jsonl(const std::filesystem::path& path, const char* expected_schema,
                    bool schema_check) {
    JsonlDoc doc;
    auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        ordered_json value;
        try {
            value = ordered_json::parse(lines[i]);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ": " + e.what(), static_cast<int>(i + 1));
        }
        if (i == 0 && value.is_object() && value.contains("schema")) {
            if (expected_schema && value["schema"] != expected_schema) {
                const std::string msg = path.string() + ": schema " +
                                        value["schema"].dump() + " does not match expected " +
                                        expected_schema;
                if (schema_check) throw Error(msg);
                log(LogLevel::Warn, msg);
            }
            doc.header = value;
            continue;
        }
        doc.records.emplace_back(i + 1, std::move(value));
    }
    if (schema_check && expected_schema && !doc.header)
        throw Error(path.string() + ": missing schema header (expected " +
                    std::string(expected_schema) + ")");
    return doc;
}

std::string dump_jsonl(const ordered_json& header, const std::vector<ordered_json>& records) {
    std::string out = header.dump();
    out += "\n";
    for (const auto& r : records) {
        out += r.dump();
        out += "\n";
    }
    return out;
}

NoteList notes_from_json(const ordered_json& arr) {
    NoteList list;
    for (const auto& row : arr) {
        if (!row.is_array() || row.size() != 4)
            throw Error("note rows must be [onset_ms, offset_ms, pitch, program]");
        list.notes.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<int>(),
                              row[3].get<int>()});
    }
    list.validate();
    return list;
}

ordered_json notes_to_json(const NoteList& list) {
    ordered_json arr = ordered_json::array();
    for (const Note& n : list.notes)
        arr.push_back({n.onset_ms, n.offset_ms, n.pitch, n.program});
    return arr;
}

std::vector<std::string> split_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

std::vector<std::filesystem::path> collect_inputs(const std::vector<std::filesystem::path>& inputs,
                                                  const std::set<std::string>& extensions) {
    std::vector<std::filesystem::path> files;
    for (const auto& input : inputs) {
        if (std::filesystem::is_directory(input)) {
            for (const auto& entry : std::filesystem::directory_iterator(input)) {
                if (!entry.is_regular_file()) continue;
                if (extensions.count(entry.path().extension().string()))
                    files.push_back(entry.path());
            }
        } else {
            files.push_back(input);
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

// Runs fn(i) over [0, n) on `jobs` threads; per-item results are collected
// in input order so output is independent of scheduling.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    };
    std::vector<std::thread> pool;
    const int count = std::min<int>(jobs, static_cast<int>(n));
    pool.reserve(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

} // namespace

// ---------------------------------------------------------------------------
// vocab

int cmd_vocab(const JobConfig& config) {
    VocabSpec spec;
    spec.notation_tokens = notation_vocab();
    spec.midi_tokens = default_midi_vocab();
    VocabLayout layout = build_vocab(spec);
    if (config.output.empty()) {
        std::fputs(layout.to_json().c_str(), stdout);
    } else {
        atomic_write_file(config.output, layout.to_json());
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// tokenize / detokenize

namespace {

struct TokenizeOutcome {
    bool ok = false;
    std::string error;
    ordered_json text_record;  // lmx.jsonl / events.jsonl line
    ordered_json index_record; // index.jsonl line
    std::filesystem::path tgr_path;
    std::string tgr_bytes;
};

TokenizeOutcome tokenize_musicxml_file(const std::filesystem::path& file,
                                       const std::filesystem::path& tgr_dir) {
    TokenizeOutcome outcome;
    const std::string id = file.stem().string();
    try {
        ParsedScore parsed = parse_musicxml_subset(read_file(file));
        LmxSeq seq = linearize(parsed.doc);
        TokenGrid grid(Modality::Notation, 1);
        for (const std::string& tok : seq) {
            const auto& vocab = notation_vocab();
            auto it = std::find(vocab.begin(), vocab.end(), tok);
            std::uint16_t local = static_cast<std::uint16_t>(it - vocab.begin());
            grid.push_bundle(std::span<const std::uint16_t>(&local, 1));
        }
        outcome.text_record = {{"id", id}, {"lmx", join_tokens(seq)},
                               {"skipped_elements", parsed.skipped_elements}};
        outcome.tgr_path = tgr_dir / (id + ".tgr");
        std::ostringstream buf(std::ios::binary);
        write_tgr(buf, grid);
        outcome.tgr_bytes = buf.str();
        outcome.index_record = {{"id", id}, {"source", file.string()},
                                {"tgr", outcome.tgr_path.string()}, {"length", seq.size()}};
        outcome.ok = true;
    } catch (const std::exception& e) {
        outcome.error = file.string() + ": " + e.what();
    }
    return outcome;
}

TokenizeOutcome tokenize_notes_record(const ordered_json& record, std::size_t line,
                                      const std::filesystem::path& source,
                                      const std::filesystem::path& tgr_dir) {
    TokenizeOutcome outcome;
    std::string id = record.value("id", "line" + std::to_string(line));
    try {
        if (!record.contains("notes")) throw Error("record lacks a notes field");
        NoteList notes = notes_from_json(record["notes"]);
        EncodeResult encoded = encode_midi_like(notes);
        TokenGrid grid(Modality::Midi, 1);
        std::vector<std::string> names;
        for (const EventTok& tok : encoded.events) {
            std::uint16_t local = static_cast<std::uint16_t>(midi_token_local_index(tok));
            grid.push_bundle(std::span<const std::uint16_t>(&local, 1));
            names.push_back(event_token_name(tok));
        }
        outcome.text_record = {{"id", id}, {"events", join_tokens(names)},
                               {"dropped_zero_length", encoded.dropped_zero_length}};
        outcome.tgr_path = tgr_dir / (id + ".tgr");
        std::ostringstream buf(std::ios::binary);
        write_tgr(buf, grid);
        outcome.tgr_bytes = buf.str();
        outcome.index_record = {{"id", id}, {"source", source.string()},
                                {"tgr", outcome.tgr_path.string()},
                                {"length", encoded.events.size()}};
        outcome.ok = true;
    } catch (const std::exception& e) {
        outcome.error = source.string() + " (" + id + "): " + e.what();
    }
    return outcome;
}

} // namespace

int cmd_tokenize(const JobConfig& config) {
    if (config.kind != "musicxml" && config.kind != "notes")
        throw Error("tokenize requires --kind musicxml or --kind notes");
    std::filesystem::create_directories(config.output);
    const auto tgr_dir = config.output / "tgr";
    std::filesystem::create_directories(tgr_dir);

    std::vector<TokenizeOutcome> outcomes;
    if (config.kind == "musicxml") {
        auto files = collect_inputs(config.inputs, {".xml", ".musicxml"});
        outcomes.resize(files.size());
        parallel_for(files.size(), config.jobs,
                     [&](std::size_t i) { outcomes[i] = tokenize_musicxml_file(files[i], tgr_dir); });
    } else {
        std::vector<std::pair<std::filesystem::path, std::pair<std::size_t, ordered_json>>> rows;
        for (const auto& input : collect_inputs(config.inputs, {".jsonl"})) {
            JsonlDoc doc = read_jsonl(input, nullptr, false);
            for (auto& rec : doc.records) rows.emplace_back(input, std::move(rec));
        }
        outcomes.resize(rows.size());
        parallel_for(rows.size(), config.jobs, [&](std::size_t i) {
            outcomes[i] = tokenize_notes_record(rows[i].second.second, rows[i].second.first,
                                                rows[i].first, tgr_dir);
        });
    }

    std::vector<ordered_json> text_records, index_records;
    int failures = 0;
    for (const TokenizeOutcome& o : outcomes) {
        if (!o.ok) {
            ++failures;
            log(LogLevel::Error, o.error);
            if (!config.keep_going) return kExitFailure;
            continue;
        }
        atomic_write_file(o.tgr_path, o.tgr_bytes);
        text_records.push_back(o.text_record);
        index_records.push_back(o.index_record);
    }

    const char* text_schema = config.kind == "musicxml" ? "smt-lmx/1" : "smt-events/1";
    const auto text_name = config.kind == "musicxml" ? "lmx.jsonl" : "events.jsonl";
    atomic_write_file(config.output / text_name,
                      dump_jsonl(header_line(text_schema, config), text_records));
    atomic_write_file(config.output / "index.jsonl",
                      dump_jsonl(header_line("smt-tokenize-index/1", config), index_records));
    log(LogLevel::Info, "tokenized " + std::to_string(text_records.size()) + " inputs, " +
                            std::to_string(failures) + " failures");
    return failures == 0 ? kExitOk : kExitPartial;
}

int cmd_detokenize(const JobConfig& config) {
    if (config.kind != "lmx" && config.kind != "events")
        throw Error("detokenize requires --kind lmx or --kind events");
    std::filesystem::create_directories(config.output);

    int failures = 0;
    std::vector<ordered_json> note_records, index_records;
    for (const auto& input : collect_inputs(config.inputs, {".jsonl"})) {
        const char* schema = config.kind == "lmx" ? "smt-lmx/1" : "smt-events/1";
        JsonlDoc doc = read_jsonl(input, schema, config.schema_check);
        for (const auto& [line, record] : doc.records) {
            std::string id = record.value("id", "line" + std::to_string(line));
            try {
                if (config.kind == "lmx") {
                    ScoreDoc score = delinearize(split_tokens(record.at("lmx").get<std::string>()));
                    const auto path = config.output / (id + ".musicxml");
                    atomic_write_file(path, write_musicxml(score));
                    index_records.push_back({{"id", id}, {"path", path.string()}});
                } else {
                    EventSeq seq;
                    for (const std::string& name :
                         split_tokens(record.at("events").get<std::string>()))
                        seq.push_back(event_token_from_name(name));
                    DecodeResult decoded = decode_midi_like(seq);
                    note_records.push_back({{"id", id}, {"notes", notes_to_json(decoded.notes)},
                                            {"repairs", decoded.repairs}});
                }
            } catch (const std::exception& e) {
                ++failures;
                log(LogLevel::Error, input.string() + " (" + id + "): " + e.what());
                if (!config.keep_going) return kExitFailure;
            }
        }
    }
    if (config.kind == "events")
        atomic_write_file(config.output / "notes.jsonl",
                          dump_jsonl(header_line("smt-notes/1", config), note_records));
    else
        atomic_write_file(config.output / "index.jsonl",
                          dump_jsonl(header_line("smt-detokenize-index/1", config), index_records));
    return failures == 0 ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------
// segment / filter

namespace {

struct SegmentStats {
    bool silent = false;
    std::vector<double> medians, means, widths, heights, staff_heights;
    std::vector<SystemBox> boxes;
};

struct VideoRecord {
    std::string video_id;
    double fps = 30.0;
    FrameDiffSeq diffs;
    std::optional<double> video_median, video_mean;
    std::vector<SegmentStats> segments;
};

VideoRecord video_from_json(const ordered_json& j) {
    VideoRecord rec;
    rec.video_id = j.at("video_id").get<std::string>();
    rec.fps = j.at("fps").get<double>();
    rec.diffs.fps = rec.fps;
    for (const auto& f : j.at("diff_flags")) rec.diffs.flags.push_back(f.get<bool>());
    if (j.contains("video_median")) rec.video_median = j["video_median"].get<double>();
    if (j.contains("video_mean")) rec.video_mean = j["video_mean"].get<double>();
    for (const auto& seg : j.at("segments")) {
        SegmentStats stats;
        stats.silent = seg.at("silent").get<bool>();
        for (const auto& m : seg.value("medians", ordered_json::array()))
            stats.medians.push_back(m.get<double>());
        for (const auto& m : seg.value("means", ordered_json::array()))
            stats.means.push_back(m.get<double>());
        int index = 0;
        for (const auto& b : seg.value("boxes", ordered_json::array())) {
            SystemBox box;
            box.x = b.at(0).get<double>();
            box.y = b.at(1).get<double>();
            box.width = b.at(2).get<double>();
            box.height = b.at(3).get<double>();
            box.page_id = index++;
            stats.boxes.push_back(box);
            stats.widths.push_back(box.width);
            stats.heights.push_back(box.height);
        }
        for (const auto& s : seg.value("staff_heights", ordered_json::array()))
            stats.staff_heights.push_back(s.get<double>());
        if (stats.medians.size() != stats.boxes.size() ||
            stats.means.size() != stats.boxes.size())
            throw Error("per-system statistics do not align with boxes");
        rec.segments.push_back(std::move(stats));
    }
    return rec;
}

ordered_json verdict_json(const ScoreVerdict& v) {
    return {{"score", v.score}, {"keep", v.keep}};
}

/// Runs the full per-video pipeline: segmentation, pairing, and every
/// statistical filter. The verdict of a candidate is the conjunction of all
/// rules that apply to it.
ordered_json process_video(const VideoRecord& rec, const FilterThresholds& t) {
    ordered_json out;
    out["video_id"] = rec.video_id;

    const auto runs = segment_runs(rec.diffs);
    const auto statics = segment_slides(rec.diffs);
    if (statics.size() != rec.segments.size())
        throw Error("record carries " + std::to_string(rec.segments.size()) +
                    " segment stats but the diff flags yield " + std::to_string(statics.size()) +
                    " static segments");

    // video-level intensity over every system's median
    std::vector<double> all_medians, all_means;
    for (const auto& seg : rec.segments) {
        all_medians.insert(all_medians.end(), seg.medians.begin(), seg.medians.end());
        all_means.insert(all_means.end(), seg.means.begin(), seg.means.end());
    }
    ScoreVerdict intensity{0, false};
    if (!all_medians.empty()) intensity = video_intensity(all_medians, t.min_video_intensity);
    out["video_intensity"] = verdict_json(intensity);
    out["transitions"] = runs.size() - statics.size();

    // video-level pixel statistics: explicit when present, otherwise the
    // median of system medians and the mean of system means
    double video_median = 0, video_mean = 0;
    if (rec.video_median) {
        video_median = *rec.video_median;
    } else if (!all_medians.empty()) {
        std::vector<double> sorted(all_medians);
        auto mid = sorted.begin() + static_cast<std::ptrdiff_t>((sorted.size() - 1) / 2);
        std::nth_element(sorted.begin(), mid, sorted.end());
        video_median = *mid;
    }
    if (rec.video_mean) {
        video_mean = *rec.video_mean;
    } else if (!all_means.empty()) {
        double sum = 0;
        for (double m : all_means) sum += m;
        video_mean = sum / static_cast<double>(all_means.size());
    }

    std::vector<bool> silent;
    for (const auto& seg : rec.segments) silent.push_back(seg.silent);
    const auto pairs = pair_segments(statics, silent, rec.fps, t.min_duration, t.max_duration);
    std::set<long> paired_starts;
    for (const auto& p : pairs) paired_starts.insert(p.segment.start_frame);

    ordered_json segments = ordered_json::array();
    for (std::size_t si = 0; si < statics.size(); ++si) {
        const SegmentStats& stats = rec.segments[si];
        ordered_json seg;
        seg["index"] = si;
        seg["start"] = statics[si].start_frame;
        seg["end"] = statics[si].end_frame;
        const double duration =
            static_cast<double>(statics[si].end_frame - statics[si].start_frame) / rec.fps;
        seg["duration_s"] = duration;
        seg["silent"] = stats.silent;
        const bool pair_keep = paired_starts.count(statics[si].start_frame) > 0;
        seg["pair_keep"] = pair_keep;
        const bool segment_keep = pair_keep && intensity.keep;
        seg["keep"] = segment_keep;

        const auto heights = height_filters(stats.heights, stats.widths, t.min_height,
                                            t.max_height, t.max_height_z);
        ordered_json systems = ordered_json::array();
        for (std::size_t bi = 0; bi < stats.boxes.size(); ++bi) {
            ordered_json sys;
            ScoreVerdict anomaly{0, true};
            if (video_median != 0 && video_mean != 0)
                anomaly = pixel_anomaly_score(stats.medians[bi], stats.means[bi], video_median,
                                              video_mean, t.max_pixel_anomaly);
            sys["pixel_anomaly"] = verdict_json(anomaly);
            sys["height"] = {{"basic_ok", heights[bi].basic_ok},
                             {"z", heights[bi].z ? ordered_json(*heights[bi].z) : ordered_json()},
                             {"z_ok", heights[bi].z_ok},
                             {"keep", heights[bi].keep}};
            double worst_overlap = 0;
            for (std::size_t bj = 0; bj < stats.boxes.size(); ++bj) {
                if (bi == bj) continue;
                SystemBox a = stats.boxes[bi], b = stats.boxes[bj];
                b.page_id = a.page_id; // systems of one slide share the page
                worst_overlap = std::max(worst_overlap, overlap_score(a, b, t.max_overlap).score);
            }
            const bool overlap_keep = !(worst_overlap > t.max_overlap);
            sys["overlap"] = {{"score", worst_overlap}, {"keep", overlap_keep}};
            if (bi < stats.staff_heights.size() && stats.staff_heights[bi] > 0) {
                SystemBox box = stats.boxes[bi];
                box.staff_height = stats.staff_heights[bi];
                NormalizedDims dims = normalize_staff_height(box);
                sys["normalized"] = {{"scale", dims.scale}, {"width", dims.width},
                                     {"height", dims.height}};
            } else {
                sys["normalized"] = nullptr;
            }
            sys["keep"] = segment_keep && anomaly.keep && heights[bi].keep && overlap_keep;
            systems.push_back(sys);
        }
        seg["systems"] = systems;
        segments.push_back(seg);
    }
    out["segments"] = segments;
    out["keep"] = intensity.keep;
    return out;
}

} // namespace

int cmd_segment(const JobConfig& config) {
    if (config.inputs.empty()) throw Error("segment requires an input JSONL file");
    std::vector<ordered_json> manifest;
    int skipped = 0;
    for (const auto& input : config.inputs) {
        JsonlDoc doc = read_jsonl(input, nullptr, false);
        for (const auto& [line, record] : doc.records) {
            try {
                manifest.push_back(process_video(video_from_json(record), config.thresholds));
            } catch (const std::exception& e) {
                ++skipped;
                std::string id = record.is_object() ? record.value("video_id", "?") : "?";
                log(LogLevel::Warn, input.string() + ":" + std::to_string(line) + " (" + id +
                                        ") skipped: " + e.what());
            }
        }
    }
    ordered_json header = header_line("ytsv-manifest/1", config);
    header["skipped_records"] = skipped;
    atomic_write_file(config.output, dump_jsonl(header, manifest));
    log(LogLevel::Info, "segmented " + std::to_string(manifest.size()) + " videos, skipped " +
                            std::to_string(skipped));
    return kExitOk;
}

int cmd_filter(const JobConfig& config) {
    if (config.inputs.empty()) throw Error("filter requires a ytsv-manifest input");
    const FilterThresholds& t = config.thresholds;
    std::vector<ordered_json> kept;
    for (const auto& input : config.inputs) {
        JsonlDoc doc = read_jsonl(input, "ytsv-manifest/1", config.schema_check);
        for (const auto& [line, video] : doc.records) {
            // re-derive verdicts from recorded scores under current thresholds
            const double intensity = video.at("video_intensity").at("score").get<double>();
            if (intensity < t.min_video_intensity) continue;
            ordered_json out;
            out["video_id"] = video.at("video_id");
            ordered_json segments = ordered_json::array();
            for (const auto& seg : video.at("segments")) {
                if (seg.at("silent").get<bool>()) continue;
                const double d = seg.at("duration_s").get<double>();
                if (d < t.min_duration || d > t.max_duration) continue;
                ordered_json out_seg;
                out_seg["index"] = seg.at("index");
                out_seg["start"] = seg.at("start");
                out_seg["end"] = seg.at("end");
                out_seg["duration_s"] = d;
                ordered_json systems = ordered_json::array();
                const auto& sys_arr = seg.at("systems");
                for (std::size_t i = 0; i < sys_arr.size(); ++i) {
                    const auto& sys = sys_arr[i];
                    if (std::abs(sys.at("pixel_anomaly").at("score").get<double>()) >
                        t.max_pixel_anomaly)
                        continue;
                    const auto& height = sys.at("height");
                    if (!height.at("basic_ok").get<bool>()) continue;
                    if (!height.at("z").is_null() &&
                        std::abs(height.at("z").get<double>()) > t.max_height_z)
                        continue;
                    if (sys.at("overlap").at("score").get<double>() > t.max_overlap) continue;
                    systems.push_back(i);
                }
                out_seg["systems"] = systems;
                segments.push_back(out_seg);
            }
            out["segments"] = segments;
            kept.push_back(out);
        }
    }
    atomic_write_file(config.output, dump_jsonl(header_line("ytsv-filtered/1", config), kept));
    return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

namespace {

struct EvalItem {
    std::optional<NoteList> notes;
    std::optional<LmxSeq> lmx;
};

std::map<std::string, EvalItem> load_eval_side(const std::filesystem::path& path,
                                               bool schema_check) {
    std::map<std::string, EvalItem> items;
    JsonlDoc doc = read_jsonl(path, "smt-eval-input/1", schema_check);
    for (const auto& [line, record] : doc.records) {
        const std::string id = record.at("id").get<std::string>();
        if (items.count(id)) throw Error(path.string() + ": duplicate id " + id);
        EvalItem item;
        if (record.contains("notes")) item.notes = notes_from_json(record["notes"]);
        if (record.contains("lmx"))
            item.lmx = split_tokens(record["lmx"].get<std::string>());
        items[id] = std::move(item);
    }
    return items;
}

ordered_json f1_json(const F1Result& r) {
    return {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
            {"matches", r.matches}};
}

} // namespace

int cmd_evaluate(const JobConfig& config) {
    auto reference = load_eval_side(config.reference, config.schema_check);
    auto hypothesis = load_eval_side(config.hypothesis, config.schema_check);
    if (hypothesis.empty()) throw Error("hypothesis set is empty");

    std::vector<std::string> unmatched;
    for (const auto& [id, _] : reference)
        if (!hypothesis.count(id)) unmatched.push_back(id);
    for (const auto& [id, _] : hypothesis)
        if (!reference.count(id)) unmatched.push_back(id);
    if (!unmatched.empty()) {
        std::string ids;
        for (const auto& id : unmatched) ids += (ids.empty() ? "" : ", ") + id;
        throw Error("unmatched pair ids: " + ids);
    }

    const std::vector<double> tolerances = {50, 100, 200};
    ordered_json per_pair = ordered_json::array();
    std::map<double, F1Result> f1_sums;
    int f1_count = 0;
    double ser_sum = 0, emd_pitch_sum = 0, emd_dur_sum = 0;
    int ser_count = 0, emd_count = 0;

    for (const auto& [id, ref] : reference) {
        const EvalItem& hyp = hypothesis.at(id);
        ordered_json entry;
        entry["id"] = id;
        if (ref.notes && hyp.notes) {
            NoteList est = *hyp.notes;
            if (config.use_dtw && !ref.notes->notes.empty() && !est.notes.empty()) {
                PianoRoll ref_roll = to_piano_roll(*ref.notes, kTickMs);
                PianoRoll est_roll = to_piano_roll(est, kTickMs);
                DtwResult dtw = dtw_align(ref_roll, est_roll);
                est = warp_notes(est, dtw.path, kTickMs);
            }
            ordered_json f1s;
            for (double tol : tolerances) {
                F1Result r = onset_f1(*ref.notes, est, tol);
                f1s[std::to_string(static_cast<int>(tol))] = f1_json(r);
                f1_sums[tol].precision += r.precision;
                f1_sums[tol].recall += r.recall;
                f1_sums[tol].f1 += r.f1;
            }
            ++f1_count;
            entry["onset_f1"] = f1s;
        }
        if (ref.lmx && hyp.lmx) {
            if (!ref.lmx->empty()) {
                const double ser = symbol_error_rate(*ref.lmx, *hyp.lmx);
                entry["ser"] = ser;
                ser_sum += ser;
                ++ser_count;
            }
            auto [ref_pitch, ref_dur] = token_histograms(*ref.lmx);
            auto [hyp_pitch, hyp_dur] = token_histograms(*hyp.lmx);
            const double ep = emd_1d(ref_pitch, hyp_pitch);
            const double ed = emd_with_shifts(ref_dur, hyp_dur);
            entry["emd_pitch"] = ep;
            entry["emd_duration"] = ed;
            emd_pitch_sum += ep;
            emd_dur_sum += ed;
            ++emd_count;
        }
        per_pair.push_back(entry);
    }

    ordered_json report;
    report["schema"] = "smt-eval-report/1";
    report["tool_version"] = kToolVersion;
    report["config_echo"] = config_echo(config);
    ordered_json aggregate;
    if (f1_count > 0) {
        ordered_json f1s;
        for (double tol : tolerances) {
            const F1Result& sum = f1_sums[tol];
            f1s[std::to_string(static_cast<int>(tol))] = {
                {"precision", sum.precision / f1_count},
                {"recall", sum.recall / f1_count},
                {"f1", sum.f1 / f1_count}};
        }
        aggregate["onset_f1"] = f1s;
    }
    if (ser_count > 0) aggregate["ser"] = ser_sum / ser_count;
    if (emd_count > 0) {
        aggregate["emd_pitch"] = emd_pitch_sum / emd_count;
        aggregate["emd_duration"] = emd_dur_sum / emd_count;
    }
    if (!config.reference_emb.empty() && !config.hypothesis_emb.empty()) {
        EmbeddingStats ref_stats = fit_embedding_stats(read_emb_file(config.reference_emb));
        EmbeddingStats hyp_stats = fit_embedding_stats(read_emb_file(config.hypothesis_emb));
        aggregate["fad"] = frechet_distance(ref_stats, hyp_stats);
    }
    report["aggregate"] = aggregate;
    report["per_pair"] = per_pair;
    atomic_write_file(config.output, report.dump(2) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// build-batches

int cmd_build_batches(const JobConfig& config) {
    if (!config.direction) throw Error("build-batches requires --direction");
    if (config.task_indexes.empty()) throw Error("build-batches requires at least one --task index");

    struct IndexEntry {
        std::string id, src, tgt;
        std::size_t src_len = 0, tgt_len = 0;
    };
    std::map<TaskKind, std::vector<IndexEntry>> datasets;
    std::map<TaskKind, std::uint64_t> sizes;
    for (const auto& [task, path] : config.task_indexes) {
        if (direction_of(task) != *config.direction)
            throw Error(std::string("task ") + to_string(task) + " does not belong to direction " +
                        to_string(*config.direction));
        JsonlDoc doc = read_jsonl(path, nullptr, false);
        std::vector<IndexEntry> entries;
        for (const auto& [line, record] : doc.records) {
            IndexEntry e;
            e.id = record.at("id").get<std::string>();
            e.src = record.value("src", "");
            e.tgt = record.value("tgt", "");
            e.src_len = record.value("src_len", 0u);
            e.tgt_len = record.value("tgt_len", 0u);
            entries.push_back(std::move(e));
        }
        sizes[task] = entries.size();
        datasets[task] = std::move(entries);
    }

    CurriculumSchedule schedule = default_schedule(*config.direction);
    std::vector<ordered_json> records;
    for (long step = config.step_begin; step < config.step_end; ++step) {
        auto slots = sample_batch(step, schedule, sizes, config.batch, config.seed);
        for (std::size_t slot = 0; slot < slots.size(); ++slot) {
            const BatchSlot& s = slots[slot];
            const IndexEntry& e = datasets[s.task][static_cast<std::size_t>(s.sample_index)];
            ordered_json rec;
            rec["step"] = step;
            rec["slot"] = slot;
            rec["task"] = to_string(s.task);
            rec["sample_id"] = e.id;
            rec["src_path"] = e.src;
            rec["tgt_path"] = e.tgt;
            if (e.src_len > 0 && e.tgt_len > 0) {
                SlicePlan plan =
                    plan_truncation(s.task, e.src_len, e.tgt_len,
                                    derive_slot_seed(config.seed, step, static_cast<int>(slot)));
                rec["src_slice"] = {plan.source.begin, plan.source.length};
                rec["tgt_slice"] = {plan.target.begin, plan.target.length};
                if (plan.image_over_limit) rec["image_over_limit"] = true;
            } else {
                rec["src_slice"] = nullptr;
                rec["tgt_slice"] = nullptr;
            }
            records.push_back(std::move(rec));
        }
    }
    atomic_write_file(config.output, dump_jsonl(header_line("smt-batches/1", config), records));
    return kExitOk;
}

} // namespace smt
