#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace smt {

/// Frame-difference flags sampled every `sample_interval` video frames;
/// flag true means the sample differs from its predecessor.
struct FrameDiffSeq {
    int sample_interval = 3;
    std::vector<bool> flags;
    double fps = 30.0;
};

enum class SegState { Static, Transition };

struct PageSegment {
    SegState state;
    long start_frame; // inclusive
    long end_frame;   // exclusive

    bool operator==(const PageSegment&) const = default;
};

/// Maximal runs of equal flags, boundaries at sample index * interval.
/// The runs tile [0, interval * |flags|).
std::vector<PageSegment> segment_runs(const FrameDiffSeq& diffs);

/// Static segments only; transition runs are dropped.
std::vector<PageSegment> segment_slides(const FrameDiffSeq& diffs);

struct PairedSegment {
    PageSegment segment;
    double duration_s;
};

/// Keeps non-silent static segments whose duration lies within
/// [min_duration, max_duration] seconds.
std::vector<PairedSegment> pair_segments(const std::vector<PageSegment>& statics,
                                         const std::vector<bool>& silent, double fps,
                                         double min_duration = 3.0, double max_duration = 20.0);

/// Thresholds for the statistical filters, overridable from the CLI and
/// echoed into manifests.
struct FilterThresholds {
    double min_video_intensity = 200.0;
    double max_pixel_anomaly = 0.1;
    double min_height = 70.0;
    double max_height = 390.0;
    double max_height_z = 1.2;
    double max_overlap = 25.0;
    double min_duration = 3.0;
    double max_duration = 20.0;
};

struct ScoreVerdict {
    double score = 0;
    bool keep = true;
};

/// Mean of per-system median intensities; videos under the threshold are
/// rejected as poor scans.
ScoreVerdict video_intensity(std::span<const double> medians, double threshold = 200.0);

/// Average of the median and mean relative deviations from the video-level
/// statistics; flags inverted or manipulated systems.
ScoreVerdict pixel_anomaly_score(double system_median, double system_mean, double video_median,
                                 double video_mean, double threshold = 0.1);

struct SystemBox {
    double x = 0, y = 0;
    double width = 0, height = 0;
    int page_id = 0;
    double staff_height = 0;
};

struct HeightVerdict {
    bool basic_ok = true;          // 70 <= h <= 390 and h < w
    std::optional<double> z;       // set when the segment has >= 2 systems and sigma > 0
    bool z_ok = true;
    bool keep = true;
};

/// Basic height constraints per system plus the population z-score rule
/// within the segment.
std::vector<HeightVerdict> height_filters(std::span<const double> heights,
                                          std::span<const double> widths, double min_height = 70,
                                          double max_height = 390, double max_z = 1.2);

/// intersection area / min height * max height; pairs above the threshold
/// indicate detection errors.
ScoreVerdict overlap_score(const SystemBox& a, const SystemBox& b, double threshold = 25.0);

struct NormalizedDims {
    double scale = 1.0;
    long width = 0;
    long height = 0;
};

/// Rescales a crop so the detected staff height becomes 18 px.
NormalizedDims normalize_staff_height(const SystemBox& box, double target_staff_height = 18.0);

} // namespace smt
