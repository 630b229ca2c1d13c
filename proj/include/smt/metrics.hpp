#pragma once

#include "smt/lmx.hpp"
#include "smt/midi.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace smt {

/// Monotone DTW path over (reference frame, estimate frame) pairs: starts
/// at (0,0), ends at (R-1, E-1), steps from {(1,0),(0,1),(1,1)}.
struct AlignmentPath {
    std::vector<std::pair<int, int>> pairs;
};

struct DtwResult {
    AlignmentPath path;
    double cost = 0;
};

/// Frame cost is the Dice distance 1 - 2|A&B|/(|A|+|B|) over active-pitch
/// sets, 0 when both frames are empty. Ties prefer the diagonal step, then
/// advancing the reference.
DtwResult dtw_align(const PianoRoll& reference, const PianoRoll& estimate);

/// Maps note times from the estimate timeline onto the reference timeline
/// through the path (first matching reference frame). Degenerate notes get
/// a minimum one-frame length.
NoteList warp_notes(const NoteList& notes, const AlignmentPath& path, double frame_ms);

struct F1Result {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    int matches = 0;
};

/// Notes match iff equal pitch and |onset difference| <= tolerance, each
/// note used at most once (maximum-cardinality matching).
F1Result onset_f1(const NoteList& reference, const NoteList& estimate, double tolerance_ms);

struct Histogram {
    std::vector<std::string> bins;
    std::vector<double> counts;
};

Histogram pitch_histogram_zero();
Histogram duration_histogram_zero();

/// Counts pitch-class and duration-class tokens; markers are ignored.
std::pair<Histogram, Histogram> token_histograms(const LmxSeq& seq);

/// 1-D EMD between unit-mass histograms: sum_k |CDF_a(k) - CDF_b(k)|.
/// All-zero histograms normalize to uniform.
double emd_1d(const Histogram& a, const Histogram& b);

/// Minimum EMD over integer shifts of the predicted histogram; mass shifted
/// off the ends is dropped before renormalizing.
double emd_with_shifts(const Histogram& reference, const Histogram& predicted,
                       const std::vector<int>& shifts = {-1, 0, 1});

struct EmbeddingStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

/// Sample mean and unbiased covariance (divisor N-1) of row vectors; N >= 2.
EmbeddingStats fit_embedding_stats(const Eigen::MatrixXd& rows);

/// ||mu_a - mu_b||^2 + Tr(Sa + Sb - 2 sqrt(Sa Sb)), the square root taken by
/// symmetric eigendecomposition of the symmetrized product with eigenvalues
/// clamped at zero. Result clamped at zero.
double frechet_distance(const EmbeddingStats& a, const EmbeddingStats& b);

// EMB1 container: magic "EMB1", u32-le N, u32-le D, then N*D float32-le.
void write_emb(std::ostream& out, const Eigen::MatrixXd& rows);
Eigen::MatrixXd read_emb(std::istream& in);
void write_emb_file(const std::filesystem::path& path, const Eigen::MatrixXd& rows);
Eigen::MatrixXd read_emb_file(const std::filesystem::path& path);

} // namespace smt
