#include "smt/ytsv.hpp"

#include "smt/errors.hpp"

#include <algorithm>
#include <cmath>

namespace smt {

std::vector<PageSegment> segment_runs(const FrameDiffSeq& diffs) {
    std::vector<PageSegment> runs;
    const long interval = diffs.sample_interval;
    std::size_t i = 0;
    while (i < diffs.flags.size()) {
        std::size_t j = i;
        while (j < diffs.flags.size() && diffs.flags[j] == diffs.flags[i]) ++j;
        runs.push_back({diffs.flags[i] ? SegState::Transition : SegState::Static,
                        static_cast<long>(i) * interval, static_cast<long>(j) * interval});
        i = j;
    }
    return runs;
}

std::vector<PageSegment> segment_slides(const FrameDiffSeq& diffs) {
    std::vector<PageSegment> statics;
    for (const PageSegment& seg : segment_runs(diffs))
        if (seg.state == SegState::Static) statics.push_back(seg);
    return statics;
}

std::vector<PairedSegment> pair_segments(const std::vector<PageSegment>& statics,
                                         const std::vector<bool>& silent, double fps,
                                         double min_duration, double max_duration) {
    if (silent.size() != statics.size())
        throw Error("silence flag count does not match the segment count");
    if (!(fps > 0)) throw Error("fps must be positive");
    std::vector<PairedSegment> pairs;
    for (std::size_t i = 0; i < statics.size(); ++i) {
        if (silent[i]) continue;
        double duration = static_cast<double>(statics[i].end_frame - statics[i].start_frame) / fps;
        if (duration < min_duration || duration > max_duration) continue;
        pairs.push_back({statics[i], duration});
    }
    return pairs;
}

ScoreVerdict video_intensity(std::span<const double> medians, double threshold) {
    if (medians.empty()) throw Error("video has no systems to score");
    double sum = 0;
    for (double m : medians) sum += m;
    double mean = sum / static_cast<double>(medians.size());
    return {mean, !(mean < threshold)};
}

ScoreVerdict pixel_anomaly_score(double system_median, double system_mean, double video_median,
                                 double video_mean, double threshold) {
    if (video_median == 0 || video_mean == 0)
        throw Error("video pixel statistics must be nonzero");
    double median_anomaly = (system_median - video_median) / video_median;
    double mean_anomaly = (system_mean - video_mean) / video_mean;
    double score = (median_anomaly + mean_anomaly) / 2.0;
    return {score, !(std::abs(score) > threshold)};
}

std::vector<HeightVerdict> height_filters(std::span<const double> heights,
                                          std::span<const double> widths, double min_height,
                                          double max_height, double max_z) {
    if (heights.size() != widths.size()) throw Error("height and width counts differ");
    std::vector<HeightVerdict> verdicts(heights.size());

    double mean = 0;
    for (double h : heights) mean += h;
    if (!heights.empty()) mean /= static_cast<double>(heights.size());
    double variance = 0;
    for (double h : heights) variance += (h - mean) * (h - mean);
    if (!heights.empty()) variance /= static_cast<double>(heights.size()); // population sigma
    const double sigma = std::sqrt(variance);
    const bool use_z = heights.size() >= 2 && sigma > 0;

    for (std::size_t i = 0; i < heights.size(); ++i) {
        HeightVerdict& v = verdicts[i];
        v.basic_ok = heights[i] >= min_height && heights[i] <= max_height &&
                     heights[i] < widths[i];
        if (use_z) {
            v.z = (heights[i] - mean) / sigma;
            v.z_ok = !(std::abs(*v.z) > max_z);
        }
        v.keep = v.basic_ok && v.z_ok;
    }
    return verdicts;
}

ScoreVerdict overlap_score(const SystemBox& a, const SystemBox& b, double threshold) {
    if (a.page_id != b.page_id) throw Error("overlap is defined for boxes on the same page");
    double ix = std::max(0.0, std::min(a.x + a.width, b.x + b.width) - std::max(a.x, b.x));
    double iy = std::max(0.0, std::min(a.y + a.height, b.y + b.height) - std::max(a.y, b.y));
    double intersection = ix * iy;
    double min_h = std::min(a.height, b.height);
    double max_h = std::max(a.height, b.height);
    double score = intersection <= 0 ? 0.0 : intersection / min_h * max_h;
    return {score, !(score > threshold)};
}

NormalizedDims normalize_staff_height(const SystemBox& box, double target_staff_height) {
    if (!(box.staff_height > 0)) throw Error("staff height must be positive");
    NormalizedDims out;
    out.scale = target_staff_height / box.staff_height;
    out.width = std::lround(box.width * out.scale);
    out.height = std::lround(box.height * out.scale);
    return out;
}

} // namespace smt
