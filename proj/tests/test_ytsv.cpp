#include "smt/errors.hpp"
#include "smt/io.hpp"
#include "smt/ytsv.hpp"

#include <nlohmann/json.hpp>

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace smt;

TEST_SUITE("ytsv") {

TEST_CASE("dataset category fixture is internally consistent") {
    const auto path = std::filesystem::path(SMT_FIXTURE_DIR) / "ytsv_categories.json";
    const auto table = nlohmann::json::parse(read_file(path));
    long videos = 0, segments = 0;
    double hours = 0;
    for (const auto& row : table["categories"]) {
        videos += row["videos"].get<long>();
        segments += row["segments"].get<long>();
        hours += row["hours"].get<double>();
    }
    CHECK(videos == table["total"]["videos"].get<long>());
    CHECK(segments == table["total"]["segments"].get<long>());
    CHECK(std::abs(hours - table["total"]["hours"].get<double>()) < 0.5);
}

TEST_CASE("slide segmentation merges runs and drops transitions") {
    FrameDiffSeq diffs;
    diffs.flags = {false, false, true, true, false, false};
    auto statics = segment_slides(diffs);
    REQUIRE(statics.size() == 2);
    CHECK(statics[0] == PageSegment{SegState::Static, 0, 6});
    CHECK(statics[1] == PageSegment{SegState::Static, 12, 18});

    FrameDiffSeq quiet;
    quiet.flags = std::vector<bool>(7, false);
    auto whole = segment_slides(quiet);
    REQUIRE(whole.size() == 1);
    CHECK(whole[0] == PageSegment{SegState::Static, 0, 21});

    FrameDiffSeq leading;
    leading.flags = {true, false};
    auto tail = segment_slides(leading);
    REQUIRE(tail.size() == 1);
    CHECK(tail[0] == PageSegment{SegState::Static, 3, 6});

    FrameDiffSeq all_transition;
    all_transition.flags = {true, true, true};
    CHECK(segment_slides(all_transition).empty());
}

TEST_CASE("segment runs tile the sampled span") {
    std::mt19937 rng(5);
    std::bernoulli_distribution flip(0.4);
    for (int trial = 0; trial < 100; ++trial) {
        FrameDiffSeq diffs;
        std::uniform_int_distribution<int> n_dist(1, 40);
        const int n = n_dist(rng);
        for (int i = 0; i < n; ++i) diffs.flags.push_back(flip(rng));
        auto runs = segment_runs(diffs);
        long cursor = 0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            CHECK(runs[i].start_frame == cursor);
            CHECK(runs[i].end_frame > runs[i].start_frame);
            if (i > 0) CHECK(runs[i].state != runs[i - 1].state);
            cursor = runs[i].end_frame;
        }
        CHECK(cursor == 3 * n);
    }
}

TEST_CASE("pairing keeps non-silent segments within duration bounds") {
    const double fps = 30.0;
    std::vector<PageSegment> statics = {
        {SegState::Static, 0, 300},     // 10 s
        {SegState::Static, 300, 375},   // 2.5 s
        {SegState::Static, 375, 675},   // 10 s but silent
        {SegState::Static, 675, 765},   // 3 s boundary
        {SegState::Static, 765, 1365},  // 20 s boundary
        {SegState::Static, 1365, 1975}, // > 20 s
    };
    std::vector<bool> silent = {false, false, true, false, false, false};
    auto pairs = pair_segments(statics, silent, fps);
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[0].duration_s == doctest::Approx(10.0));
    CHECK(pairs[1].duration_s == doctest::Approx(3.0));
    CHECK(pairs[2].duration_s == doctest::Approx(20.0));

    CHECK_THROWS_AS(pair_segments(statics, {false}, fps), Error);
}

TEST_CASE("video intensity is the mean of system medians") {
    std::vector<double> good = {210, 190, 230};
    auto keep = video_intensity(good);
    CHECK(keep.score == doctest::Approx(210.0));
    CHECK(keep.keep);

    std::vector<double> bad = {150, 160, 170};
    auto drop = video_intensity(bad);
    CHECK(drop.score == doctest::Approx(160.0));
    CHECK_FALSE(drop.keep);

    std::vector<double> boundary = {200};
    CHECK(video_intensity(boundary).keep); // strict <

    std::vector<double> empty;
    CHECK_THROWS_AS(video_intensity(empty), Error);
}

TEST_CASE("pixel anomaly averages the relative deviations") {
    auto inverted = pixel_anomaly_score(100, 110, 200, 220);
    CHECK(inverted.score == doctest::Approx(-0.5));
    CHECK_FALSE(inverted.keep);

    auto identical = pixel_anomaly_score(200, 220, 200, 220);
    CHECK(identical.score == doctest::Approx(0.0));
    CHECK(identical.keep);

    auto slight = pixel_anomaly_score(195, 215, 200, 220);
    CHECK(slight.score == doctest::Approx(-0.023863636363636364).epsilon(1e-12));
    CHECK(slight.keep);

    CHECK_THROWS_AS(pixel_anomaly_score(100, 110, 0, 220), Error);
    CHECK_THROWS_AS(pixel_anomaly_score(100, 110, 200, 0), Error);
}

TEST_CASE("height filters combine basic constraints with the z-score rule") {
    std::vector<double> short_h = {60}, short_w = {300};
    CHECK_FALSE(height_filters(short_h, short_w)[0].keep);

    std::vector<double> ok_h = {100}, ok_w = {300};
    auto single = height_filters(ok_h, ok_w);
    CHECK(single[0].keep);
    CHECK_FALSE(single[0].z.has_value()); // no z-score with one system

    std::vector<double> heights = {100, 100, 100, 160};
    std::vector<double> widths = {300, 300, 300, 300};
    auto verdicts = height_filters(heights, widths);
    REQUIRE(verdicts.size() == 4);
    for (int i = 0; i < 3; ++i) {
        CHECK(verdicts[static_cast<std::size_t>(i)].keep);
        CHECK(*verdicts[static_cast<std::size_t>(i)].z ==
              doctest::Approx(-0.57735026918962576).epsilon(1e-12));
    }
    CHECK(*verdicts[3].z == doctest::Approx(1.7320508075688773).epsilon(1e-12));
    CHECK_FALSE(verdicts[3].keep);
    CHECK(verdicts[3].basic_ok);

    std::vector<double> equal_h = {100, 100}, equal_w = {200, 200};
    auto flat = height_filters(equal_h, equal_w);
    CHECK_FALSE(flat[0].z.has_value()); // sigma = 0
    CHECK(flat[0].keep);

    std::vector<double> square_h = {100}, square_w = {100};
    CHECK_FALSE(height_filters(square_h, square_w)[0].keep); // strict h < w
}

TEST_CASE("overlap score scales intersection by the height ratio") {
    SystemBox a{0, 0, 100, 100, 0, 0};
    SystemBox apart{200, 200, 50, 50, 0, 0};
    auto disjoint = overlap_score(a, apart);
    CHECK(disjoint.score == 0.0);
    CHECK(disjoint.keep);

    SystemBox tall{0, 0, 100, 100, 0, 0};
    SystemBox shallow{0, 95, 5, 50, 0, 0}; // 5x5 intersection
    auto mixed = overlap_score(tall, shallow);
    CHECK(mixed.score == doctest::Approx(50.0));
    CHECK_FALSE(mixed.keep);

    SystemBox narrow{0, 0, 10, 100, 0, 0};
    auto identical = overlap_score(narrow, narrow);
    CHECK(identical.score == doctest::Approx(1000.0));
    CHECK_FALSE(identical.keep);

    SystemBox other_page{0, 0, 10, 100, 1, 0};
    CHECK_THROWS_AS(overlap_score(narrow, other_page), Error);
}

TEST_CASE("staff normalization targets 18 pixels") {
    SystemBox coarse{0, 0, 200, 100, 0, 24};
    auto scaled = normalize_staff_height(coarse);
    CHECK(scaled.scale == doctest::Approx(0.75));
    CHECK(scaled.width == 150);
    CHECK(scaled.height == 75);

    SystemBox exact{0, 0, 333, 111, 0, 18};
    auto unchanged = normalize_staff_height(exact);
    CHECK(unchanged.scale == doctest::Approx(1.0));
    CHECK(unchanged.width == 333);
    CHECK(unchanged.height == 111);

    SystemBox fine{0, 0, 100, 40, 0, 9};
    auto doubled = normalize_staff_height(fine);
    CHECK(doubled.scale == doctest::Approx(2.0));
    CHECK(doubled.width == 200);
    CHECK(doubled.height == 80);

    SystemBox broken{0, 0, 100, 40, 0, 0};
    CHECK_THROWS_AS(normalize_staff_height(broken), Error);

    // re-measured staff height lands within the rounding bound
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> staff_dist(6.0, 60.0);
    for (int trial = 0; trial < 100; ++trial) {
        SystemBox box{0, 0, 500, 200, 0, staff_dist(rng)};
        auto dims = normalize_staff_height(box);
        CHECK(std::abs(std::lround(box.staff_height * dims.scale) - 18.0) <= 0.5);
    }
}

} // TEST_SUITE
