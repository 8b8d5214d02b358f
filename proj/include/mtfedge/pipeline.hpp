#pragma once

// Configuration shared by the single-pass and tiled drivers, and the
// single-pass detect -> threshold -> gradient -> trace pipeline itself.

#include <optional>
#include <stdexcept>

#include "mtfedge/detect.hpp"
#include "mtfedge/mtf.hpp"
#include "mtfedge/raster.hpp"
#include "mtfedge/segment.hpp"

namespace mtfedge::pipeline {

struct PipelineConfig {
    /// Absolute threshold on |LoG response|; empty selects the automatic
    /// rule t = 0.2 * max|response| over the whole image.
    std::optional<double> threshold;
    int min_len = segment::kDefaultMinLen;
    segment::ScanMode scan_mode = segment::ScanMode::maximal_runs;
    detect::GradientOp gradient_op = detect::GradientOp::sobel;
    int half_window = mtf::kDefaultHalfWindow;
    double rank_divisor = segment::kDefaultRankDivisor;
    int tile = 512;
    int max_len = 256;
    int workers = 0;  // 0 = decided by the caller (env var / hardware)
};

inline void validate(const PipelineConfig& cfg) {
    if (cfg.threshold && !(*cfg.threshold >= 0.0))
        throw std::invalid_argument("config: threshold must be >= 0");
    if (cfg.min_len < 1)
        throw std::invalid_argument("config: min-len must be >= 1");
    if (cfg.half_window < 2)
        throw std::invalid_argument("config: half-window must be >= 2");
    if (!(cfg.rank_divisor > 0.0))
        throw std::invalid_argument("config: rank-divisor must be > 0");
    if (cfg.tile < 16)
        throw std::invalid_argument("config: tile must be >= 16");
    if (cfg.max_len < 1)
        throw std::invalid_argument("config: max-len must be >= 1");
    if (cfg.workers < 0)
        throw std::invalid_argument("config: workers must be >= 0");
}

/// Full single-pass run over one image. With the automatic threshold, an
/// image whose LoG response is identically zero has no edges to find and
/// yields an empty rank vector (thresholding at the literal 0 would set
/// every bit instead).
inline segment::RankVector run_pipeline(const raster::Image& img,
                                        const PipelineConfig& cfg) {
    validate(cfg);
    const raster::Image response = detect::convolve2d(img, detect::log_kernel_5x5());
    double t;
    if (cfg.threshold) {
        t = *cfg.threshold;
    } else {
        const double peak = detect::max_abs(response);
        if (peak == 0.0) return {};
        t = detect::kAutoThresholdFactor * peak;
    }
    const detect::BinaryMap bits = detect::binary_threshold(response, t);
    const detect::AngleField angles =
        detect::gradient_direction(detect::gradient(img, cfg.gradient_op));
    return segment::trace_segments(bits, angles, cfg.min_len, cfg.scan_mode,
                                   cfg.rank_divisor);
}

}  // namespace mtfedge::pipeline
