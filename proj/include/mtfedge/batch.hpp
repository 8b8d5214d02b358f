#pragma once

// Deterministic tile-parallel execution: the image is cut into disjoint
// cores, each processed with enough halo that every segment starting inside
// a core is computed from exactly the pixels the single-pass run would use.
// Results are identical to run_pipeline float for float, for any worker
// count and any tile completion order.

#include <atomic>
#include <chrono>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "mtfedge/detect.hpp"
#include "mtfedge/pipeline.hpp"
#include "mtfedge/raster.hpp"
#include "mtfedge/segment.hpp"

namespace mtfedge::batch {

inline constexpr int kMinTile = 16;
inline constexpr int kLogRadius = 2;       // 5x5 operator
inline constexpr int kGradientRadius = 1;  // 3x3 operator

struct Rect {
    int top = 0, left = 0, height = 0, width = 0;

    bool contains(raster::PixelCoord p) const noexcept {
        return p.row >= top && p.row < top + height && p.col >= left &&
               p.col < left + width;
    }
    friend bool operator==(const Rect&, const Rect&) = default;
};

/// One tile: the core it owns plus the halo margin read around it.
struct TileSpec {
    Rect core;
    int halo = 0;

    friend bool operator==(const TileSpec&, const TileSpec&) = default;
};

struct BatchReport {
    segment::RankVector merged;  // global coordinates, scan order
    std::optional<segment::EdgeSegment> best;
    int tiles_processed = 0;
    std::vector<double> tile_ms;
    /// Segments that ran into the halo edge; always 0 when every segment is
    /// shorter than the planned max_len.
    int truncated_segments = 0;
};

/// Margin that guarantees a chain of up to max_len rows starting in a core
/// is traced entirely from locally exact data: operator radii for the LoG
/// and gradient supports, plus the chain extent, plus its termination probe.
inline int halo_for(int max_len) {
    return kLogRadius + kGradientRadius + max_len + 1;
}

/// Grid of tile x tile cores (ragged at the right/bottom edges) that
/// partitions a width x height raster exactly, each carrying the halo for
/// max_len.
inline std::vector<TileSpec> plan_tiles(int width, int height, int tile, int max_len) {
    if (tile < kMinTile)
        throw std::invalid_argument("plan_tiles: tile must be >= 16");
    if (max_len < 1)
        throw std::invalid_argument("plan_tiles: max_len must be >= 1");
    if (width < 1 || height < 1)
        throw std::invalid_argument("plan_tiles: empty raster");
    const int halo = halo_for(max_len);
    std::vector<TileSpec> tiles;
    for (int top = 0; top < height; top += tile)
        for (int left = 0; left < width; left += tile)
            tiles.push_back({{top, left, std::min(tile, height - top),
                              std::min(tile, width - left)},
                             halo});
    return tiles;
}

namespace detail {

inline Rect expand_clamped(const Rect& core, int margin, int width, int height) {
    const int top = std::max(0, core.top - margin);
    const int left = std::max(0, core.left - margin);
    const int bottom = std::min(height, core.top + core.height + margin);
    const int right = std::min(width, core.left + core.width + margin);
    return {top, left, bottom - top, right - left};
}

/// Runs fn(0..n-1) on up to `workers` threads (the caller participates).
/// Indices are claimed from an atomic counter; the first exception wins and
/// is rethrown after all threads stop.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (n == 0) return;
    const int threads = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(workers), n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
            {
                std::lock_guard lock(error_mutex);
                if (error) return;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads - 1);
        for (int i = 1; i < threads; ++i) pool.emplace_back(run);
        run();
    }
    if (error) std::rethrow_exception(error);
}

template <typename CropFn>
BatchReport process_tiles_impl(CropFn&& crop_fn, int width, int height,
                               const std::vector<TileSpec>& tiles,
                               const pipeline::PipelineConfig& cfg, int workers) {
    pipeline::validate(cfg);
    if (workers < 1)
        throw std::invalid_argument("process_tiles: workers must be >= 1");
    long long area = 0;
    for (const TileSpec& t : tiles) {
        if (t.core.top < 0 || t.core.left < 0 || t.core.height < 1 ||
            t.core.width < 1 || t.core.top + t.core.height > height ||
            t.core.left + t.core.width > width)
            throw std::invalid_argument("process_tiles: tile/image mismatch");
        area += static_cast<long long>(t.core.height) * t.core.width;
    }
    if (area != static_cast<long long>(width) * height)
        throw std::invalid_argument("process_tiles: tiles do not partition the image");

    const detect::Kernel log5 = detect::log_kernel_5x5();
    BatchReport report;
    report.tiles_processed = static_cast<int>(tiles.size());
    report.tile_ms.assign(tiles.size(), 0.0);

    // Resolve the automatic threshold first: the rule is global, so each
    // tile measures the exact LoG peak over its own core and the maxima are
    // reduced after the scan. Cores partition the image, so the reduced
    // value equals the single-pass peak.
    double threshold;
    if (cfg.threshold) {
        threshold = *cfg.threshold;
    } else {
        std::vector<double> maxima(tiles.size(), 0.0);
        parallel_for(tiles.size(), workers, [&](std::size_t i) {
            const Rect crop_rect =
                expand_clamped(tiles[i].core, kLogRadius, width, height);
            const raster::Image local = crop_fn(crop_rect);
            const raster::Image response = detect::convolve2d(local, log5);
            const Rect& core = tiles[i].core;
            double m = 0.0;
            for (int r = 0; r < core.height; ++r)
                for (int c = 0; c < core.width; ++c)
                    m = std::max(m, std::abs(response(core.top - crop_rect.top + r,
                                                      core.left - crop_rect.left + c)));
            maxima[i] = m;
        });
        double peak = 0.0;
        for (double m : maxima) peak = std::max(peak, m);
        if (peak == 0.0) return report;  // no signal anywhere
        threshold = detect::kAutoThresholdFactor * peak;
    }

    std::vector<std::vector<segment::EdgeSegment>> owned(tiles.size());
    std::vector<int> truncated(tiles.size(), 0);
    parallel_for(tiles.size(), workers, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        const Rect crop_rect =
            expand_clamped(tiles[i].core, tiles[i].halo, width, height);
        const raster::Image local = crop_fn(crop_rect);
        const detect::BinaryMap bits =
            detect::binary_threshold(detect::convolve2d(local, log5), threshold);
        const detect::AngleField angles =
            detect::gradient_direction(detect::gradient(local, cfg.gradient_op));
        segment::RankVector rv = segment::trace_segments(
            bits, angles, cfg.min_len, cfg.scan_mode, cfg.rank_divisor);
        const bool clipped_bottom = crop_rect.top + crop_rect.height < height;
        for (segment::EdgeSegment& s : rv.segments) {
            const raster::PixelCoord global{crop_rect.top + s.start.row,
                                            crop_rect.left + s.start.col};
            if (!tiles[i].core.contains(global)) continue;  // another tile owns it
            if (clipped_bottom && s.start.row + s.length_l == crop_rect.height)
                ++truncated[i];
            s.start = global;
            for (int& col : s.cols) col += crop_rect.left;
            owned[i].push_back(std::move(s));
        }
        report.tile_ms[i] =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                      t0)
                .count();
    });

    for (std::size_t i = 0; i < tiles.size(); ++i) {
        report.truncated_segments += truncated[i];
        for (segment::EdgeSegment& s : owned[i])
            report.merged.segments.push_back(std::move(s));
    }
    // Restore global scan order; start pixels are unique, so this is a
    // total order and the merged vector matches the single-pass output.
    std::sort(report.merged.segments.begin(), report.merged.segments.end(),
              [](const segment::EdgeSegment& a, const segment::EdgeSegment& b) {
                  return a.start.row != b.start.row ? a.start.row < b.start.row
                                                    : a.start.col < b.start.col;
              });
    if (!report.merged.empty())
        report.best = segment::best_edge(report.merged);
    return report;
}

}  // namespace detail

/// Tile-parallel run over an in-memory image.
inline BatchReport process_tiles(const raster::Image& img,
                                 const std::vector<TileSpec>& tiles,
                                 const pipeline::PipelineConfig& cfg, int workers) {
    return detail::process_tiles_impl(
        [&img](const Rect& r) {
            return raster::crop(img, r.top, r.left, r.height, r.width);
        },
        img.width(), img.height(), tiles, cfg, workers);
}

/// Tile-parallel run streaming windows straight from a binary PGM on disk,
/// for rasters that should not be loaded whole.
inline BatchReport process_tiles(const raster::PgmTileReader& reader,
                                 const std::vector<TileSpec>& tiles,
                                 const pipeline::PipelineConfig& cfg, int workers) {
    return detail::process_tiles_impl(
        [&reader](const Rect& r) {
            return reader.read_window(r.top, r.left, r.height, r.width);
        },
        reader.width(), reader.height(), tiles, cfg, workers);
}

}  // namespace mtfedge::batch
