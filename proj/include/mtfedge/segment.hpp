#pragma once

// Scans a binary edge map for vertical and near-vertical segments, measures
// length, thickness and angle for each, scores them with the rank formula
// R = (l - t) / divisor + |theta|, and selects the best edge.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mtfedge/detect.hpp"
#include "mtfedge/raster.hpp"

namespace mtfedge::segment {

inline constexpr double kDefaultRankDivisor = 10.0;
inline constexpr int kDefaultMinLen = 6;

/// One candidate edge. `cols` holds the traced column at each row the chain
/// spans (cols.front() == start.col); profile extraction uses it to undo the
/// slant before averaging.
struct EdgeSegment {
    raster::PixelCoord start;
    int length_l = 0;        // rows spanned
    double thickness_t = 1;  // mean horizontal run width, >= 1
    double theta = 0;        // edge angle vs x-axis, [0, pi/2]
    double rank_r = 0;
    std::vector<int> cols;

    friend bool operator==(const EdgeSegment&, const EdgeSegment&) = default;
};

/// Scored segments in scan order (row-major by start pixel).
struct RankVector {
    std::vector<EdgeSegment> segments;

    bool empty() const noexcept { return segments.empty(); }
    std::size_t size() const noexcept { return segments.size(); }

    friend bool operator==(const RankVector&, const RankVector&) = default;
};

enum class ScanMode {
    maximal_runs,   // emit only chains whose start has no set predecessor
    per_pixel_runs  // emit a chain from every set pixel (overlapping suffixes)
};

/// R = (l - t) / divisor + |theta|, with l and t in pixels and theta in
/// radians within [0, pi/2].
inline double rank(double l, double t, double theta,
                   double divisor = kDefaultRankDivisor) {
    if (!(theta >= 0.0 && theta <= detect::kHalfPi))
        throw std::invalid_argument("rank: theta outside [0, pi/2]");
    return (l - t) / divisor + std::abs(theta);
}

namespace detail {

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Angle of the chain's endpoint-to-endpoint line, used only when every chain
// pixel has a vanished gradient. atan2(0, 0) = 0 for single-pixel chains.
inline double geometric_chain_angle(int length, int start_col, int end_col) {
    return std::atan2(static_cast<double>(length - 1),
                      static_cast<double>(std::abs(end_col - start_col)));
}

}  // namespace detail

/// Walks the map for downward near-vertical chains. From a set pixel the
/// chain continues on the next row at the same column if set, else one to
/// the right, else one to the left, and stops when no candidate is set.
/// Thickness is the mean width of the horizontal run of set pixels through
/// each chain pixel; theta is the median edge_normal_angle over chain pixels
/// with a live gradient (geometric chain angle when none have one).
inline RankVector trace_segments(const detect::BinaryMap& bm,
                                 const detect::AngleField& angles, int min_len,
                                 ScanMode mode,
                                 double divisor = kDefaultRankDivisor) {
    if (bm.width != angles.angles.width() || bm.height != angles.angles.height())
        throw std::invalid_argument("trace_segments: map/angle dimension mismatch");
    if (min_len < 1)
        throw std::invalid_argument("trace_segments: min_len must be >= 1");

    const int w = bm.width, h = bm.height;
    RankVector out;
    std::vector<int> cols;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!bm.test(r, c)) continue;
            if (mode == ScanMode::maximal_runs && r > 0) {
                bool has_pred = false;
                for (int dc = -1; dc <= 1 && !has_pred; ++dc) {
                    const int pc = c + dc;
                    if (pc >= 0 && pc < w && bm.test(r - 1, pc)) has_pred = true;
                }
                if (has_pred) continue;
            }

            cols.clear();
            int cc = c;
            cols.push_back(cc);
            for (int rr = r + 1; rr < h; ++rr) {
                int next = -1;
                if (bm.test(rr, cc))
                    next = cc;
                else if (cc + 1 < w && bm.test(rr, cc + 1))
                    next = cc + 1;
                else if (cc - 1 >= 0 && bm.test(rr, cc - 1))
                    next = cc - 1;
                if (next < 0) break;
                cc = next;
                cols.push_back(cc);
            }

            const int len = static_cast<int>(cols.size());
            if (len < min_len) continue;

            double width_sum = 0.0;
            std::vector<double> live_angles;
            for (int i = 0; i < len; ++i) {
                const int row = r + i, col = cols[i];
                int lo = col, hi = col;
                while (lo - 1 >= 0 && bm.test(row, lo - 1)) --lo;
                while (hi + 1 < w && bm.test(row, hi + 1)) ++hi;
                width_sum += hi - lo + 1;
                if (!angles.zero_gradient.test(row, col))
                    live_angles.push_back(
                        detect::edge_normal_angle(angles.angles(row, col)));
            }
            const double thickness = width_sum / len;
            const double theta =
                live_angles.empty()
                    ? detail::geometric_chain_angle(len, cols.front(), cols.back())
                    : detail::median(std::move(live_angles));

            EdgeSegment seg;
            seg.start = {r, c};
            seg.length_l = len;
            seg.thickness_t = thickness;
            seg.theta = theta;
            seg.rank_r = rank(len, thickness, theta, divisor);
            seg.cols = cols;
            out.segments.push_back(std::move(seg));
        }
    }
    return out;
}

/// Segment with maximal rank; ties go to the longer segment, then to the
/// lexicographically smaller (row, col) start.
inline const EdgeSegment& best_edge(const RankVector& rv) {
    if (rv.empty())
        throw std::invalid_argument("best_edge: empty rank vector");
    const EdgeSegment* best = &rv.segments.front();
    for (const EdgeSegment& s : rv.segments) {
        if (s.rank_r > best->rank_r ||
            (s.rank_r == best->rank_r &&
             (s.length_l > best->length_l ||
              (s.length_l == best->length_l &&
               (s.start.row < best->start.row ||
                (s.start.row == best->start.row && s.start.col < best->start.col))))))
            best = &s;
    }
    return *best;
}

/// Stable descending sort by rank; equal ranks keep scan order.
inline RankVector sort_ranked(RankVector rv) {
    std::stable_sort(rv.segments.begin(), rv.segments.end(),
                     [](const EdgeSegment& a, const EdgeSegment& b) {
                         return a.rank_r > b.rank_r;
                     });
    return rv;
}

}  // namespace mtfedge::segment
