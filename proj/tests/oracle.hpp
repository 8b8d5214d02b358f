#pragma once

// Brute-force reference for segment tracing, kept deliberately separate from
// the library implementation: chains are re-derived pixel by pixel with its
// own stepping/measurement code so the two can disagree.

#include <algorithm>
#include <cmath>
#include <vector>

#include "mtfedge/detect.hpp"
#include "mtfedge/segment.hpp"

namespace oracle {

struct Chain {
    int start_row = 0;
    int start_col = 0;
    std::vector<int> cols;
};

inline Chain walk(const mtfedge::detect::BinaryMap& bm, int r, int c) {
    Chain chain{r, c, {c}};
    int row = r, col = c;
    while (true) {
        ++row;
        if (row >= bm.height) break;
        int chosen = -2;
        // preference order: same column, right, left
        const int candidates[3] = {col, col + 1, col - 1};
        for (int cand : candidates) {
            if (cand >= 0 && cand < bm.width && bm.test(row, cand)) {
                chosen = cand;
                break;
            }
        }
        if (chosen == -2) break;
        col = chosen;
        chain.cols.push_back(col);
    }
    return chain;
}

inline bool has_predecessor(const mtfedge::detect::BinaryMap& bm, int r, int c) {
    if (r == 0) return false;
    for (int pc = c - 1; pc <= c + 1; ++pc)
        if (pc >= 0 && pc < bm.width && bm.test(r - 1, pc)) return true;
    return false;
}

inline int run_width(const mtfedge::detect::BinaryMap& bm, int r, int c) {
    int count = 1;
    for (int cc = c - 1; cc >= 0 && bm.test(r, cc); --cc) ++count;
    for (int cc = c + 1; cc < bm.width && bm.test(r, cc); ++cc) ++count;
    return count;
}

// Enumerates the chain from every set pixel, drops non-maximal starts when
// asked, measures each chain, and applies the rank formula.
inline std::vector<mtfedge::segment::EdgeSegment> enumerate(
    const mtfedge::detect::BinaryMap& bm, const mtfedge::detect::AngleField& angles,
    int min_len, bool maximal_only, double divisor) {
    std::vector<mtfedge::segment::EdgeSegment> out;
    for (int r = 0; r < bm.height; ++r) {
        for (int c = 0; c < bm.width; ++c) {
            if (!bm.test(r, c)) continue;
            if (maximal_only && has_predecessor(bm, r, c)) continue;
            const Chain chain = walk(bm, r, c);
            const int len = static_cast<int>(chain.cols.size());
            if (len < min_len) continue;

            double widths = 0.0;
            std::vector<double> live;
            for (int i = 0; i < len; ++i) {
                widths += run_width(bm, r + i, chain.cols[i]);
                if (!angles.zero_gradient.test(r + i, chain.cols[i]))
                    live.push_back(mtfedge::detect::kHalfPi -
                                   std::abs(angles.angles(r + i, chain.cols[i])));
            }
            const double thickness = widths / len;

            double theta;
            if (live.empty()) {
                theta = std::atan2(static_cast<double>(len - 1),
                                   static_cast<double>(
                                       std::abs(chain.cols.back() - chain.cols.front())));
            } else {
                const std::size_t mid = live.size() / 2;
                std::nth_element(live.begin(), live.begin() + mid, live.end());
                const double upper = live[mid];
                if (live.size() % 2) {
                    theta = upper;
                } else {
                    std::nth_element(live.begin(), live.begin() + mid - 1, live.end());
                    theta = 0.5 * (live[mid - 1] + upper);
                }
            }

            mtfedge::segment::EdgeSegment seg;
            seg.start = {r, c};
            seg.length_l = len;
            seg.thickness_t = thickness;
            seg.theta = theta;
            seg.rank_r = (len - thickness) / divisor + std::abs(theta);
            seg.cols = chain.cols;
            out.push_back(std::move(seg));
        }
    }
    return out;
}

}  // namespace oracle
