#include "smt/metrics.hpp"

#include "smt/errors.hpp"
#include "smt/io.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace smt {

namespace {

double dice_distance(const std::bitset<128>& a, const std::bitset<128>& b) {
    const std::size_t total = a.count() + b.count();
    if (total == 0) return 0.0;
    return 1.0 - 2.0 * static_cast<double>((a & b).count()) / static_cast<double>(total);
}

} // namespace

DtwResult dtw_align(const PianoRoll& reference, const PianoRoll& estimate) {
    const std::size_t R = reference.frames(), E = estimate.frames();
    if (R == 0 || E == 0) throw Error("piano rolls must have at least one frame");

    // step codes: 0 = diagonal, 1 = advance reference, 2 = advance estimate
    std::vector<std::uint8_t> step(R * E, 0);
    std::vector<double> prev(E), cur(E);

    for (std::size_t i = 0; i < R; ++i) {
        for (std::size_t j = 0; j < E; ++j) {
            const double c = dice_distance(reference.frame(i), estimate.frame(j));
            if (i == 0 && j == 0) {
                cur[j] = c;
                continue;
            }
            double best = std::numeric_limits<double>::infinity();
            std::uint8_t choice = 0;
            if (i > 0 && j > 0 && prev[j - 1] < best) { best = prev[j - 1]; choice = 0; }
            if (i > 0 && prev[j] < best) { best = prev[j]; choice = 1; }
            if (j > 0 && cur[j - 1] < best) { best = cur[j - 1]; choice = 2; }
            cur[j] = c + best;
            step[i * E + j] = choice;
        }
        std::swap(prev, cur);
    }

    DtwResult result;
    result.cost = prev[E - 1];
    std::size_t i = R - 1, j = E - 1;
    result.path.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
    while (i != 0 || j != 0) {
        switch (step[i * E + j]) {
            case 0: --i; --j; break;
            case 1: --i; break;
            default: --j; break;
        }
        result.path.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
    std::reverse(result.path.pairs.begin(), result.path.pairs.end());
    return result;
}

NoteList warp_notes(const NoteList& notes, const AlignmentPath& path, double frame_ms) {
    if (!(frame_ms > 0)) throw Error("frame length must be positive");
    if (path.pairs.empty()) throw Error("alignment path is empty");

    // first reference frame observed for each estimate frame
    std::map<int, int> est_to_ref;
    for (const auto& [r, e] : path.pairs) est_to_ref.emplace(e, r);
    const int last_est = path.pairs.back().second;
    const int last_ref = path.pairs.back().first;

    auto map_frame = [&](long est_frame) -> long {
        if (est_frame <= 0) return est_to_ref.begin()->second;
        if (est_frame >= last_est) return last_ref + (est_frame - last_est);
        auto it = est_to_ref.find(static_cast<int>(est_frame));
        return it->second;
    };

    NoteList out;
    for (const Note& n : notes.notes) {
        const auto onset_frame = static_cast<long>(std::floor(n.onset_ms / frame_ms));
        const long last_frame =
            std::max(onset_frame, static_cast<long>(std::ceil(n.offset_ms / frame_ms)) - 1);
        Note warped = n;
        warped.onset_ms = static_cast<double>(map_frame(onset_frame)) * frame_ms;
        warped.offset_ms = static_cast<double>(map_frame(last_frame) + 1) * frame_ms;
        if (warped.offset_ms <= warped.onset_ms) warped.offset_ms = warped.onset_ms + frame_ms;
        out.notes.push_back(warped);
    }
    out.sort();
    return out;
}

namespace {

// Kuhn's augmenting-path maximum matching within one pitch group.
struct PitchMatcher {
    const std::vector<double>& ref;
    const std::vector<double>& est;
    double tolerance;
    std::vector<int> match_of_est; // est index -> ref index or -1
    std::vector<char> visited;

    bool augment(int r) {
        for (std::size_t e = 0; e < est.size(); ++e) {
            if (visited[e] || std::abs(ref[static_cast<std::size_t>(r)] - est[e]) > tolerance)
                continue;
            visited[e] = 1;
            if (match_of_est[e] < 0 || augment(match_of_est[e])) {
                match_of_est[e] = r;
                return true;
            }
        }
        return false;
    }
};

} // namespace

F1Result onset_f1(const NoteList& reference, const NoteList& estimate, double tolerance_ms) {
    if (!(tolerance_ms > 0)) throw Error("tolerance must be positive");

    std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_pitch;
    for (const Note& n : reference.notes) by_pitch[n.pitch].first.push_back(n.onset_ms);
    for (const Note& n : estimate.notes) by_pitch[n.pitch].second.push_back(n.onset_ms);

    int matches = 0;
    for (auto& [pitch, group] : by_pitch) {
        auto& [ref_onsets, est_onsets] = group;
        if (ref_onsets.empty() || est_onsets.empty()) continue;
        PitchMatcher m{ref_onsets, est_onsets, tolerance_ms,
                       std::vector<int>(est_onsets.size(), -1), {}};
        for (int r = 0; r < static_cast<int>(ref_onsets.size()); ++r) {
            m.visited.assign(est_onsets.size(), 0);
            if (m.augment(r)) ++matches;
        }
    }

    F1Result result;
    result.matches = matches;
    const auto n_ref = reference.notes.size(), n_est = estimate.notes.size();
    result.precision = n_est == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(n_est);
    result.recall = n_ref == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(n_ref);
    result.f1 = (result.precision + result.recall) == 0
                    ? 0.0
                    : 2 * result.precision * result.recall / (result.precision + result.recall);
    return result;
}

Histogram pitch_histogram_zero() {
    return {pitch_token_names(), std::vector<double>(pitch_token_names().size(), 0.0)};
}

Histogram duration_histogram_zero() {
    return {duration_token_names(), std::vector<double>(duration_token_names().size(), 0.0)};
}

std::pair<Histogram, Histogram> token_histograms(const LmxSeq& seq) {
    Histogram pitch = pitch_histogram_zero();
    Histogram duration = duration_histogram_zero();
    for (const std::string& tok : seq) {
        if (auto s = semitone_from_pitch_token(tok)) {
            pitch.counts[static_cast<std::size_t>(*s - kMinPitchSemitone)] += 1;
        } else if (auto d = duration_class_from_name(tok)) {
            duration.counts[static_cast<std::size_t>(*d)] += 1;
        }
    }
    return {pitch, duration};
}

namespace {

std::vector<double> normalized(const std::vector<double>& counts) {
    double total = 0;
    for (double c : counts) total += c;
    std::vector<double> mass(counts.size());
    if (total <= 0) {
        std::fill(mass.begin(), mass.end(), 1.0 / static_cast<double>(counts.size()));
    } else {
        for (std::size_t i = 0; i < counts.size(); ++i) mass[i] = counts[i] / total;
    }
    return mass;
}

} // namespace

double emd_1d(const Histogram& a, const Histogram& b) {
    if (a.bins != b.bins) throw Error("histogram bins do not match");
    if (a.bins.empty()) throw Error("histograms must have at least one bin");
    auto pa = normalized(a.counts), pb = normalized(b.counts);
    double emd = 0, cdf_a = 0, cdf_b = 0;
    for (std::size_t k = 0; k < pa.size(); ++k) {
        cdf_a += pa[k];
        cdf_b += pb[k];
        emd += std::abs(cdf_a - cdf_b);
    }
    return emd;
}

double emd_with_shifts(const Histogram& reference, const Histogram& predicted,
                       const std::vector<int>& shifts) {
    if (reference.bins != predicted.bins) throw Error("histogram bins do not match");
    double best = std::numeric_limits<double>::infinity();
    const auto n = static_cast<long>(predicted.counts.size());
    for (int shift : shifts) {
        Histogram shifted{predicted.bins, std::vector<double>(predicted.counts.size(), 0.0)};
        for (long j = 0; j < n; ++j) {
            long src = j - shift;
            if (src >= 0 && src < n) shifted.counts[static_cast<std::size_t>(j)] =
                predicted.counts[static_cast<std::size_t>(src)];
        }
        best = std::min(best, emd_1d(reference, shifted));
    }
    return best;
}

EmbeddingStats fit_embedding_stats(const Eigen::MatrixXd& rows) {
    const auto n = rows.rows();
    if (n < 2) throw Error("at least two embedding vectors are required");
    EmbeddingStats stats;
    stats.mean = rows.colwise().mean().transpose();
    Eigen::MatrixXd centered = rows.rowwise() - stats.mean.transpose();
    stats.covariance = (centered.transpose() * centered) / static_cast<double>(n - 1);
    stats.covariance = ((stats.covariance + stats.covariance.transpose()) / 2.0).eval();
    return stats;
}

double frechet_distance(const EmbeddingStats& a, const EmbeddingStats& b) {
    if (a.mean.size() != b.mean.size() || a.covariance.rows() != b.covariance.rows())
        throw Error("embedding statistics dimensions do not match");
    if (!a.mean.allFinite() || !b.mean.allFinite() || !a.covariance.allFinite() ||
        !b.covariance.allFinite())
        throw Error("embedding statistics must be finite");
    const double asym_a = (a.covariance - a.covariance.transpose()).cwiseAbs().maxCoeff();
    const double asym_b = (b.covariance - b.covariance.transpose()).cwiseAbs().maxCoeff();
    if (asym_a > 1e-8 || asym_b > 1e-8) throw Error("covariance matrices must be symmetric");

    const Eigen::MatrixXd product = a.covariance * b.covariance;
    const Eigen::MatrixXd sym = (product + product.transpose()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed");

    double trace_sqrt = 0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
        trace_sqrt += std::sqrt(std::max(0.0, solver.eigenvalues()[i]));

    const double mean_term = (a.mean - b.mean).squaredNorm();
    const double value =
        mean_term + a.covariance.trace() + b.covariance.trace() - 2.0 * trace_sqrt;
    return std::max(0.0, value);
}

namespace {

void put_u32le(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                 static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(b, 4);
}

std::uint32_t get_u32le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw Error("truncated EMB1 stream");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

} // namespace

void write_emb(std::ostream& out, const Eigen::MatrixXd& rows) {
    out.write("EMB1", 4);
    put_u32le(out, static_cast<std::uint32_t>(rows.rows()));
    put_u32le(out, static_cast<std::uint32_t>(rows.cols()));
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        for (Eigen::Index j = 0; j < rows.cols(); ++j) {
            const float v = static_cast<float>(rows(i, j));
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            put_u32le(out, bits);
        }
    }
    if (!out) throw Error("EMB1 write failed");
}

Eigen::MatrixXd read_emb(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != "EMB1") throw Error("not an EMB1 stream");
    const std::uint32_t n = get_u32le(in), d = get_u32le(in);
    Eigen::MatrixXd rows(n, d);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < d; ++j) {
            std::uint32_t bits = get_u32le(in);
            float v;
            std::memcpy(&v, &bits, 4);
            rows(i, j) = v;
        }
    }
    return rows;
}

void write_emb_file(const std::filesystem::path& path, const Eigen::MatrixXd& rows) {
    std::ostringstream buf(std::ios::binary);
    write_emb(buf, rows);
    atomic_write_file(path, buf.str());
}

Eigen::MatrixXd read_emb_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    return read_emb(in);
}

} // namespace smt
