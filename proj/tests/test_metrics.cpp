#include "smt/errors.hpp"
#include "smt/metrics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace smt;

TEST_SUITE("metrics") {

TEST_CASE("dtw on identical rolls is the zero-cost diagonal") {
    NoteList notes;
    notes.notes.push_back({0, 100, 60, 0});
    PianoRoll roll = to_piano_roll(notes, 10);
    DtwResult r = dtw_align(roll, roll);
    CHECK(r.cost == 0.0);
    REQUIRE(r.path.pairs.size() == roll.frames());
    for (std::size_t i = 0; i < r.path.pairs.size(); ++i) {
        CHECK(r.path.pairs[i].first == static_cast<int>(i));
        CHECK(r.path.pairs[i].second == static_cast<int>(i));
    }
}

TEST_CASE("dtw maps duplicated frames two-to-one") {
    PianoRoll ref(4);
    ref.set(0, 60);
    ref.set(1, 64);
    ref.set(2, 67);
    ref.set(3, 60);
    PianoRoll est(8);
    for (std::size_t i = 0; i < 4; ++i) {
        est.frame(2 * i) = ref.frame(i);
        est.frame(2 * i + 1) = ref.frame(i);
    }
    DtwResult r = dtw_align(ref, est);
    CHECK(r.cost == 0.0);
    for (const auto& [ri, ei] : r.path.pairs) CHECK(ri == ei / 2);
}

TEST_CASE("dtw treats empty frames as zero cost") {
    PianoRoll empty(5);
    DtwResult r = dtw_align(empty, empty);
    CHECK(r.cost == 0.0);
    CHECK(r.path.pairs.size() == 5);
    CHECK_THROWS_AS(dtw_align(PianoRoll(), empty), Error);
}

TEST_CASE("dtw cost equals the all-paths oracle on small rolls") {
    std::mt19937 rng(21);
    for (int trial = 0; trial < 60; ++trial) {
        PianoRoll ref = oracle::random_roll(rng, 8);
        PianoRoll est = oracle::random_roll(rng, 8);
        DtwResult r = dtw_align(ref, est);
        CHECK(r.cost == doctest::Approx(oracle::dtw_all_paths_cost(ref, est)).epsilon(1e-12));
        // path validity
        CHECK(r.path.pairs.front() == std::pair<int, int>{0, 0});
        CHECK(r.path.pairs.back() ==
              std::pair<int, int>{static_cast<int>(ref.frames()) - 1,
                                  static_cast<int>(est.frames()) - 1});
        for (std::size_t i = 1; i < r.path.pairs.size(); ++i) {
            int dr = r.path.pairs[i].first - r.path.pairs[i - 1].first;
            int de = r.path.pairs[i].second - r.path.pairs[i - 1].second;
            CHECK(dr >= 0);
            CHECK(de >= 0);
            CHECK(dr + de >= 1);
            CHECK(dr <= 1);
            CHECK(de <= 1);
        }
    }
}

TEST_CASE("warp through the identity path is the identity") {
    NoteList notes;
    notes.notes.push_back({0, 30, 60, 0});
    notes.notes.push_back({10, 50, 64, 0});
    PianoRoll roll = to_piano_roll(notes, 10);
    DtwResult r = dtw_align(roll, roll);
    CHECK(warp_notes(notes, r.path, 10) == notes);
    CHECK(warp_notes(NoteList{}, r.path, 10).notes.empty());
}

TEST_CASE("warp through a duplication path halves onsets") {
    AlignmentPath path;
    for (int i = 0; i < 4; ++i) {
        path.pairs.emplace_back(i, 2 * i);
        path.pairs.emplace_back(i, 2 * i + 1);
    }
    NoteList notes;
    notes.notes.push_back({40, 80, 60, 0}); // est frames 4..7 -> ref frames 2..3
    NoteList warped = warp_notes(notes, path, 10);
    REQUIRE(warped.notes.size() == 1);
    CHECK(warped.notes[0].onset_ms == doctest::Approx(20.0));
    CHECK(warped.notes[0].offset_ms == doctest::Approx(40.0));
}

TEST_CASE("onset F1 matches within tolerance on equal pitch") {
    NoteList ref, est;
    ref.notes.push_back({0, 100, 60, 0});
    est.notes.push_back({40, 100, 60, 0});
    CHECK(onset_f1(ref, est, 50).f1 == doctest::Approx(1.0));

    est.notes[0].onset_ms = 60;
    CHECK(onset_f1(ref, est, 50).f1 == doctest::Approx(0.0));

    NoteList two_refs;
    two_refs.notes.push_back({0, 100, 60, 0});
    two_refs.notes.push_back({30, 100, 60, 0});
    NoteList one_est;
    one_est.notes.push_back({20, 100, 60, 0});
    F1Result r = onset_f1(two_refs, one_est, 50);
    CHECK(r.matches == 1);
    CHECK(r.precision == doctest::Approx(1.0));
    CHECK(r.recall == doctest::Approx(0.5));
    CHECK(r.f1 == doctest::Approx(2.0 / 3.0));

    CHECK(onset_f1(NoteList{}, NoteList{}, 50).f1 == 0.0);
    CHECK_THROWS_AS(onset_f1(ref, est, 0), Error);
}

TEST_CASE("onset F1 match counts equal exhaustive maximum matching") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 150; ++trial) {
        NoteList ref = oracle::random_notes(rng, 6, false);
        NoteList est = oracle::random_notes(rng, 6, false);
        for (double tol : {15.0, 50.0, 200.0}) {
            CHECK(onset_f1(ref, est, tol).matches ==
                  oracle::max_matching_exhaustive(ref, est, tol));
        }
    }
}

TEST_CASE("token histograms count pitch and duration classes only") {
    auto [pitch, duration] =
        token_histograms({"measure", "C4", "quarter", "C4", "half", "G3", "quarter"});
    CHECK(pitch.counts[60 - 36] == 2); // C4
    CHECK(pitch.counts[55 - 36] == 1); // G3
    CHECK(duration.counts[5] == 2);    // quarter
    CHECK(duration.counts[4] == 1);    // half
    double pitch_total = 0, dur_total = 0;
    for (double c : pitch.counts) pitch_total += c;
    for (double c : duration.counts) dur_total += c;
    CHECK(pitch_total == 3);
    CHECK(dur_total == 3);

    auto [ep, ed] = token_histograms({});
    for (double c : ep.counts) CHECK(c == 0);
    for (double c : ed.counts) CHECK(c == 0);

    auto [mp, md] = token_histograms({"measure", "chord", "tie", "staff2", "dot", "voice_2"});
    for (double c : mp.counts) CHECK(c == 0);
    for (double c : md.counts) CHECK(c == 0);
}

TEST_CASE("one-dimensional EMD follows the CDF identity") {
    Histogram a{{"x", "y", "z"}, {0.5, 0.5, 0.0}};
    Histogram b{{"x", "y", "z"}, {0.0, 0.5, 0.5}};
    CHECK(emd_1d(a, a) == doctest::Approx(0.0));
    CHECK(emd_1d(a, b) == doctest::Approx(1.0));

    Histogram first{{"x", "y", "z"}, {1, 0, 0}};
    Histogram second{{"x", "y", "z"}, {0, 1, 0}};
    CHECK(emd_1d(first, second) == doctest::Approx(1.0));

    Histogram mismatched{{"x", "y"}, {1, 0}};
    CHECK_THROWS_AS(emd_1d(a, mismatched), Error);
}

TEST_CASE("EMD equals the transport oracle on random 13-bin pairs") {
    std::mt19937 rng(41);
    const auto bins = duration_token_names();
    for (int trial = 0; trial < 100; ++trial) {
        Histogram a = oracle::random_histogram(rng, bins);
        Histogram b = oracle::random_histogram(rng, bins);
        CHECK(emd_1d(a, b) == doctest::Approx(oracle::transport_1d(a.counts, b.counts))
                                  .epsilon(1e-9));
    }
}

TEST_CASE("EMD is a metric on normalized histograms") {
    std::mt19937 rng(43);
    const auto bins = duration_token_names();
    for (int trial = 0; trial < 60; ++trial) {
        Histogram a = oracle::random_histogram(rng, bins);
        Histogram b = oracle::random_histogram(rng, bins);
        Histogram c = oracle::random_histogram(rng, bins);
        const double ab = emd_1d(a, b), ba = emd_1d(b, a);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(emd_1d(a, a) == doctest::Approx(0.0));
        CHECK(ab <= emd_1d(a, c) + emd_1d(c, b) + 1e-9);
    }
}

TEST_CASE("shifted EMD detects off-by-one duration interpretations") {
    Histogram ref = duration_histogram_zero();
    ref.counts[4] = 3; // half
    ref.counts[5] = 5; // quarter
    ref.counts[6] = 2; // eighth

    Histogram shifted_up = duration_histogram_zero();
    for (std::size_t i = 0; i + 1 < ref.counts.size(); ++i)
        shifted_up.counts[i + 1] = ref.counts[i];
    CHECK(emd_with_shifts(ref, shifted_up) == doctest::Approx(0.0));

    Histogram shifted_down = duration_histogram_zero();
    for (std::size_t i = 1; i < ref.counts.size(); ++i)
        shifted_down.counts[i - 1] = ref.counts[i];
    CHECK(emd_with_shifts(ref, shifted_down) == doctest::Approx(0.0));

    CHECK(emd_with_shifts(ref, ref) == doctest::Approx(0.0));

    std::mt19937 rng(47);
    for (int trial = 0; trial < 50; ++trial) {
        Histogram a = oracle::random_histogram(rng, ref.bins);
        Histogram b = oracle::random_histogram(rng, ref.bins);
        CHECK(emd_with_shifts(a, b) <= emd_1d(a, b) + 1e-12);
    }
}

TEST_CASE("frechet distance matches the 1-D closed form") {
    EmbeddingStats a{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)};
    EmbeddingStats b = a;
    CHECK(frechet_distance(a, b) == doctest::Approx(0.0));

    b.mean(0) = 3.0;
    CHECK(frechet_distance(a, b) == doctest::Approx(9.0).epsilon(1e-12));

    b.mean(0) = 0.0;
    b.covariance(0, 0) = 4.0;
    CHECK(frechet_distance(a, b) == doctest::Approx(1.0).epsilon(1e-12)); // (1-2)^2

    std::mt19937 rng(53);
    std::uniform_real_distribution<double> mean_dist(-5, 5);
    std::uniform_real_distribution<double> var_dist(0.1, 9);
    for (int trial = 0; trial < 100; ++trial) {
        EmbeddingStats x{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1)};
        EmbeddingStats y = x;
        x.mean(0) = mean_dist(rng);
        y.mean(0) = mean_dist(rng);
        x.covariance(0, 0) = var_dist(rng);
        y.covariance(0, 0) = var_dist(rng);
        const double closed = std::pow(x.mean(0) - y.mean(0), 2) +
                              std::pow(std::sqrt(x.covariance(0, 0)) -
                                       std::sqrt(y.covariance(0, 0)), 2);
        CHECK(frechet_distance(x, y) == doctest::Approx(closed).epsilon(1e-9));
    }
}

TEST_CASE("frechet distance is symmetric and non-negative in 4-D") {
    std::mt19937 rng(59);
    std::normal_distribution<double> gauss(0, 1);
    auto random_stats = [&] {
        Eigen::MatrixXd rows(12, 4);
        for (Eigen::Index i = 0; i < rows.rows(); ++i)
            for (Eigen::Index j = 0; j < rows.cols(); ++j) rows(i, j) = gauss(rng);
        return fit_embedding_stats(rows);
    };
    for (int trial = 0; trial < 100; ++trial) {
        EmbeddingStats a = random_stats(), b = random_stats();
        const double ab = frechet_distance(a, b), ba = frechet_distance(b, a);
        CHECK(std::abs(ab - ba) < 1e-9);
        CHECK(ab >= 0.0);
    }
    EmbeddingStats a = random_stats();
    CHECK(frechet_distance(a, a) == doctest::Approx(0.0).epsilon(1e-9));

    EmbeddingStats narrow{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)};
    EmbeddingStats wide{Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3)};
    CHECK_THROWS_AS(frechet_distance(narrow, wide), Error);

    EmbeddingStats crooked{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)};
    crooked.covariance(0, 1) = 0.5; // asymmetric
    CHECK_THROWS_AS(frechet_distance(crooked, narrow), Error);

    EmbeddingStats infinite{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)};
    infinite.mean(0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(frechet_distance(infinite, narrow), Error);
}

TEST_CASE("embedding statistics use the unbiased covariance") {
    Eigen::MatrixXd same(2, 3);
    same << 1, 2, 3, 1, 2, 3;
    EmbeddingStats stats = fit_embedding_stats(same);
    CHECK(stats.covariance.cwiseAbs().maxCoeff() == doctest::Approx(0.0));

    Eigen::MatrixXd pair(2, 1);
    pair << 0, 2;
    EmbeddingStats two = fit_embedding_stats(pair);
    CHECK(two.mean(0) == doctest::Approx(1.0));
    CHECK(two.covariance(0, 0) == doctest::Approx(2.0)); // divisor N-1

    std::mt19937 rng(61);
    std::normal_distribution<double> gauss(0, 1);
    Eigen::MatrixXd rows(100, 4);
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
        for (Eigen::Index j = 0; j < rows.cols(); ++j) rows(i, j) = gauss(rng);
    EmbeddingStats stats4 = fit_embedding_stats(rows);
    CHECK((stats4.covariance - stats4.covariance.transpose()).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::MatrixXd one(1, 4);
    CHECK_THROWS_AS(fit_embedding_stats(one), Error);
}

TEST_CASE("EMB1 files round-trip") {
    std::mt19937 rng(67);
    std::normal_distribution<double> gauss(0, 1);
    Eigen::MatrixXd rows(5, 3);
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
        for (Eigen::Index j = 0; j < rows.cols(); ++j)
            rows(i, j) = static_cast<float>(gauss(rng)); // float-representable
    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    write_emb(buf, rows);
    const std::string bytes = buf.str();
    CHECK(bytes.substr(0, 4) == "EMB1");
    CHECK(bytes.size() == 12 + 5 * 3 * 4);
    Eigen::MatrixXd back = read_emb(buf);
    CHECK((back - rows).cwiseAbs().maxCoeff() == 0.0);
}

} // TEST_SUITE
