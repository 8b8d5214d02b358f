#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "mtfedge/detect.hpp"
#include "mtfedge/pipeline.hpp"
#include "mtfedge/segment.hpp"
#include "mtfedge/synth.hpp"
#include "oracle.hpp"

using namespace mtfedge;
using detect::AngleField;
using detect::BinaryMap;
using segment::EdgeSegment;
using segment::RankVector;
using segment::ScanMode;

namespace {

// Angle field whose live pixels all report a horizontal gradient (alpha 0),
// i.e. every edge normal is vertical.
AngleField vertical_step_angles(int w, int h) {
    AngleField af{raster::Image(w, h), BinaryMap(w, h)};
    return af;  // angles all 0, no zero-gradient sentinels
}

AngleField all_sentinel_angles(int w, int h) {
    AngleField af{raster::Image(w, h), BinaryMap(w, h)};
    for (auto& b : af.zero_gradient.bits) b = 1;
    return af;
}

AngleField random_angles(std::mt19937& rng, int w, int h, double sentinel_rate) {
    AngleField af{raster::Image(w, h), BinaryMap(w, h)};
    std::uniform_real_distribution<double> dist(-detect::kHalfPi + 1e-9,
                                                detect::kHalfPi);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            if (coin(rng) < sentinel_rate) {
                af.angles(r, c) = 0.0;
                af.zero_gradient.set(r, c, true);
            } else {
                af.angles(r, c) = dist(rng);
            }
        }
    return af;
}

BinaryMap random_map(std::mt19937& rng, int w, int h, double density) {
    BinaryMap bm(w, h);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (auto& b : bm.bits) b = coin(rng) < density ? 1 : 0;
    return bm;
}

bool segments_equal(const std::vector<EdgeSegment>& a,
                    const std::vector<EdgeSegment>& b) {
    return a == b;  // exact: same floats, same columns
}

}  // namespace

TEST_CASE("rank formula", "[segment]") {
    SECTION("collapses when l == t and theta == 0") {
        CHECK(segment::rank(5, 5, 0.0) == 0.0);
    }
    SECTION("long thin vertical edge") {
        CHECK(segment::rank(15, 1, std::numbers::pi / 2) ==
              Catch::Approx(2.9707963267948966).margin(1e-12));
    }
    SECTION("back-solved literature anchor") {
        CHECK(segment::rank(15, 1, 1.5108) == Catch::Approx(2.9108).margin(1e-12));
    }
    SECTION("theta outside [0, pi/2] is rejected") {
        CHECK_THROWS_AS(segment::rank(10, 1, -0.1), std::invalid_argument);
        CHECK_THROWS_AS(segment::rank(10, 1, 1.7), std::invalid_argument);
        CHECK_THROWS_AS(segment::rank(10, 1, std::nan("")), std::invalid_argument);
    }
    SECTION("alternate divisor") {
        CHECK(segment::rank(20, 2, 0.0, 2.0) == 9.0);
    }
}

TEST_CASE("rank monotonicity", "[segment]") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> len(1.0, 300.0);
    std::uniform_real_distribution<double> th(0.0, detect::kHalfPi);
    for (int iter = 0; iter < 100; ++iter) {
        const double l = len(rng), t = 1.0 + len(rng) / 10.0, theta = th(rng);
        CHECK(segment::rank(l + 1, t, theta) - segment::rank(l, t, theta) ==
              Catch::Approx(0.1).margin(1e-15));
        CHECK(segment::rank(l, t + 0.5, theta) < segment::rank(l, t, theta));
        if (theta < detect::kHalfPi - 0.01)
            CHECK(segment::rank(l, t, theta + 0.01) > segment::rank(l, t, theta));
    }
}

TEST_CASE("tracing a single set column", "[segment]") {
    BinaryMap bm(8, 9);
    for (int r = 2; r <= 6; ++r) bm.set(r, 3, true);
    const AngleField af = vertical_step_angles(8, 9);

    SECTION("maximal-runs yields one segment") {
        const RankVector rv = segment::trace_segments(bm, af, 1, ScanMode::maximal_runs);
        REQUIRE(rv.size() == 1);
        const EdgeSegment& s = rv.segments[0];
        CHECK(s.start == raster::PixelCoord{2, 3});
        CHECK(s.length_l == 5);
        CHECK(s.thickness_t == 1.0);
        CHECK(s.theta == detect::kHalfPi);
        CHECK(s.rank_r == Catch::Approx(0.4 + detect::kHalfPi).margin(1e-12));
    }
    SECTION("per-pixel-runs yields the overlapping suffix pattern") {
        const RankVector rv =
            segment::trace_segments(bm, af, 1, ScanMode::per_pixel_runs);
        REQUIRE(rv.size() == 5);
        for (int i = 0; i < 5; ++i) {
            CHECK(rv.segments[i].start == raster::PixelCoord{2 + i, 3});
            CHECK(rv.segments[i].length_l == 5 - i);
        }
    }
    SECTION("min_len filters short suffixes") {
        const RankVector rv =
            segment::trace_segments(bm, af, 4, ScanMode::per_pixel_runs);
        CHECK(rv.size() == 2);  // lengths 5 and 4 survive
    }
}

TEST_CASE("tracing corner cases", "[segment]") {
    const AngleField af = vertical_step_angles(4, 4);
    SECTION("empty map gives an empty rank vector") {
        const RankVector rv =
            segment::trace_segments(BinaryMap(4, 4), af, 1, ScanMode::maximal_runs);
        CHECK(rv.empty());
    }
    SECTION("dimension mismatch is rejected") {
        CHECK_THROWS_AS(
            segment::trace_segments(BinaryMap(5, 4), af, 1, ScanMode::maximal_runs),
            std::invalid_argument);
    }
    SECTION("min_len below 1 is rejected") {
        CHECK_THROWS_AS(
            segment::trace_segments(BinaryMap(4, 4), af, 0, ScanMode::maximal_runs),
            std::invalid_argument);
    }
}

TEST_CASE("chain drift prefers same column, then right, then left", "[segment]") {
    BinaryMap bm(5, 3);
    bm.set(0, 2, true);
    bm.set(1, 1, true);  // only left available
    bm.set(2, 1, true);
    bm.set(2, 2, true);  // same column preferred over right
    const RankVector rv = segment::trace_segments(
        bm, all_sentinel_angles(5, 3), 1, ScanMode::maximal_runs);
    REQUIRE_FALSE(rv.empty());
    const EdgeSegment& s = rv.segments[0];
    REQUIRE(s.cols == std::vector<int>{2, 1, 1});
}

TEST_CASE("geometric fallback angle on sentinel-only chains", "[segment]") {
    BinaryMap bm(6, 6);
    for (int r = 0; r < 6; ++r) bm.set(r, 2, true);
    const RankVector rv = segment::trace_segments(
        bm, all_sentinel_angles(6, 6), 1, ScanMode::maximal_runs);
    REQUIRE(rv.size() == 1);
    CHECK(rv.segments[0].theta == detect::kHalfPi);  // straight down
}

TEST_CASE("best edge selection and tie-breaks", "[segment]") {
    auto seg = [](double rank, int len, int row, int col) {
        EdgeSegment s;
        s.start = {row, col};
        s.length_l = len;
        s.rank_r = rank;
        return s;
    };
    SECTION("argmax") {
        RankVector rv{{seg(1.0, 5, 0, 0), seg(2.5, 5, 1, 0), seg(0.3, 5, 2, 0)}};
        CHECK(segment::best_edge(rv).rank_r == 2.5);
    }
    SECTION("equal rank prefers the longer segment") {
        RankVector rv{{seg(2.5, 10, 0, 0), seg(2.5, 14, 5, 0)}};
        CHECK(segment::best_edge(rv).length_l == 14);
    }
    SECTION("equal rank and length prefer the smaller (row, col)") {
        RankVector rv{{seg(2.5, 10, 3, 7), seg(2.5, 10, 3, 2), seg(2.5, 10, 1, 9)}};
        CHECK(segment::best_edge(rv).start == raster::PixelCoord{1, 9});
    }
    SECTION("single segment") {
        RankVector rv{{seg(0.7, 6, 2, 2)}};
        CHECK(segment::best_edge(rv).start == raster::PixelCoord{2, 2});
    }
    SECTION("empty vector is rejected") {
        CHECK_THROWS_AS(segment::best_edge(RankVector{}), std::invalid_argument);
    }
}

TEST_CASE("sort_ranked is a stable descending sort", "[segment]") {
    auto seg = [](double rank, int row) {
        EdgeSegment s;
        s.start = {row, 0};
        s.rank_r = rank;
        return s;
    };
    const RankVector rv{{seg(0.3, 0), seg(2.5, 1), seg(1.0, 2), seg(2.5, 3)}};
    const RankVector sorted = segment::sort_ranked(rv);
    REQUIRE(sorted.size() == 4);
    CHECK(sorted.segments[0].start.row == 1);  // first 2.5 keeps scan order
    CHECK(sorted.segments[1].start.row == 3);
    CHECK(sorted.segments[2].rank_r == 1.0);
    CHECK(sorted.segments[3].rank_r == 0.3);
    CHECK(segment::sort_ranked(sorted) == sorted);  // idempotent
}

TEST_CASE("best edge equals the head of the sorted vector for distinct ranks",
          "[segment]") {
    std::mt19937 rng(12);
    for (int iter = 0; iter < 50; ++iter) {
        RankVector rv;
        std::set<int> used;
        const int n = 1 + static_cast<int>(rng() % 12);
        for (int i = 0; i < n; ++i) {
            int key;
            do key = static_cast<int>(rng() % 1000);
            while (!used.insert(key).second);
            EdgeSegment s;
            s.start = {i, 0};
            s.length_l = 1 + static_cast<int>(rng() % 30);
            s.rank_r = key / 250.0;
            rv.segments.push_back(s);
        }
        CHECK(segment::best_edge(rv) == segment::sort_ranked(rv).segments.front());
    }
}

TEST_CASE("tracer matches the brute-force enumerator", "[segment]") {
    std::mt19937 rng(13);
    for (int iter = 0; iter < 300; ++iter) {
        const int w = 3 + static_cast<int>(rng() % 6);
        const int h = 3 + static_cast<int>(rng() % 6);
        const BinaryMap bm = random_map(rng, w, h, 0.2 + 0.5 * (iter % 10) / 10.0);
        const AngleField af = random_angles(rng, w, h, 0.3);
        for (const ScanMode mode : {ScanMode::maximal_runs, ScanMode::per_pixel_runs}) {
            const RankVector got = segment::trace_segments(bm, af, 1, mode);
            const auto want = oracle::enumerate(bm, af, 1,
                                                mode == ScanMode::maximal_runs, 10.0);
            REQUIRE(segments_equal(got.segments, want));
        }
    }
}

TEST_CASE("per-pixel runs contain the maximal runs", "[segment]") {
    std::mt19937 rng(14);
    for (int iter = 0; iter < 100; ++iter) {
        const BinaryMap bm = random_map(rng, 10, 10, 0.35);
        const AngleField af = random_angles(rng, 10, 10, 0.2);
        const RankVector maximal =
            segment::trace_segments(bm, af, 1, ScanMode::maximal_runs);
        const RankVector per_pixel =
            segment::trace_segments(bm, af, 1, ScanMode::per_pixel_runs);
        std::set<std::pair<std::pair<int, int>, int>> all;
        for (const EdgeSegment& s : per_pixel.segments)
            all.insert({{s.start.row, s.start.col}, s.length_l});
        for (const EdgeSegment& s : maximal.segments)
            REQUIRE(all.count({{s.start.row, s.start.col}, s.length_l}) == 1);
    }
}

TEST_CASE("ideal vertical edge ranks best with a vertical angle", "[segment]") {
    synth::EdgeTarget target;  // vertical hard step, 256x256
    const raster::Image img = synth::render(target);
    const RankVector rv = pipeline::run_pipeline(img, pipeline::PipelineConfig{});
    REQUIRE_FALSE(rv.empty());
    const EdgeSegment best = segment::best_edge(rv);
    CHECK(std::abs(best.theta - detect::kHalfPi) < 0.05);
    CHECK(best.length_l == 256);
    CHECK(std::abs(best.start.col - 128) <= 2);
}

TEST_CASE("best edge is invariant under intensity scaling", "[segment]") {
    synth::EdgeTarget target;
    target.blur_sigma = 1.0;
    target.noise_sigma = 2.0;
    target.seed = 77;
    target.width = 96;
    target.height = 96;
    const raster::Image img = synth::render(target);

    pipeline::PipelineConfig cfg;
    cfg.threshold = 150.0;
    const RankVector base = pipeline::run_pipeline(img, cfg);
    REQUIRE_FALSE(base.empty());
    const EdgeSegment b0 = segment::best_edge(base);

    for (const double k : {0.5, 3.0, 16.0}) {
        raster::Image scaled(img.width(), img.height());
        for (int r = 0; r < img.height(); ++r)
            for (int c = 0; c < img.width(); ++c) scaled(r, c) = k * img(r, c);
        pipeline::PipelineConfig scaled_cfg;
        scaled_cfg.threshold = k * 150.0;
        const RankVector rv = pipeline::run_pipeline(scaled, scaled_cfg);
        REQUIRE_FALSE(rv.empty());
        const EdgeSegment b = segment::best_edge(rv);
        CHECK(b.start == b0.start);
        CHECK(b.length_l == b0.length_l);
        CHECK(b.thickness_t == b0.thickness_t);
        CHECK(b.theta == Catch::Approx(b0.theta).margin(1e-12));
    }
}
