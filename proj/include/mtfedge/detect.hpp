#pragma once

// Spatial-domain edge detection: 2-D convolution with clamp-to-edge borders,
// the fixed 5x5 Laplacian-of-Gaussian operator, Sobel/Prewitt gradients with
// magnitude and direction planes, and binary thresholding of the response.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "mtfedge/raster.hpp"

namespace mtfedge::detect {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

/// Relative factor for the automatic threshold rule
/// t = kAutoThresholdFactor * max|response|.
inline constexpr double kAutoThresholdFactor = 0.2;

/// Square convolution kernel of odd size, row-major weights.
struct Kernel {
    int size = 0;
    std::vector<double> weights;

    Kernel(int size_, std::vector<double> weights_)
        : size(size_), weights(std::move(weights_)) {
        if (size < 1 || size % 2 == 0)
            throw std::invalid_argument("Kernel: size must be odd and >= 1");
        if (weights.size() != static_cast<std::size_t>(size) * size)
            throw std::invalid_argument("Kernel: weight count does not match size");
        for (double w : weights)
            if (!std::isfinite(w))
                throw std::invalid_argument("Kernel: weights must be finite");
    }

    double at(int i, int j) const {
        return weights[static_cast<std::size_t>(i) * size + j];
    }
};

struct GradientField {
    raster::Image gx;  // d/dx, x grows with column
    raster::Image gy;  // d/dy, y grows with row
};

/// Row-major bit plane.
struct BinaryMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMap() = default;
    BinaryMap(int width_, int height_)
        : width(width_), height(height_),
          bits(static_cast<std::size_t>(width_) * height_, 0) {}

    bool test(int r, int c) const {
        return bits[static_cast<std::size_t>(r) * width + c] != 0;
    }
    void set(int r, int c, bool v) {
        bits[static_cast<std::size_t>(r) * width + c] = v ? 1 : 0;
    }

    friend bool operator==(const BinaryMap&, const BinaryMap&) = default;
};

/// Gradient direction plane, radians in [-pi/2, pi/2]. Pixels where both
/// gradient components vanish hold the sentinel 0 and are marked in
/// zero_gradient so angle statistics can leave them out.
struct AngleField {
    raster::Image angles;
    BinaryMap zero_gradient;
};

enum class Border { replicate };

enum class GradientOp { sobel, prewitt };

/// Correlates the kernel with the image: out(r,c) = sum k(i,j) * img(r+i-s,
/// c+j-s) with s = size/2, sampling outside the image replicated from the
/// nearest edge pixel. Output dimensions equal input dimensions.
inline raster::Image convolve2d(const raster::Image& img, const Kernel& k,
                                Border = Border::replicate) {
    const int w = img.width(), h = img.height();
    const int n = k.size, s = n / 2;
    if (n > w || n > h)
        throw std::invalid_argument("convolve2d: kernel larger than image");
    raster::Image out(w, h);
    auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
    // The border arm walks the kernel in the same (i, j) order as the
    // interior arm so tiled and untiled runs accumulate bit-identically.
    for (int r = 0; r < h; ++r) {
        const bool row_inside = r >= s && r + s < h;
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            if (row_inside && c >= s && c + s < w) {
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        acc += k.at(i, j) * img(r + i - s, c + j - s);
            } else {
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        acc += k.at(i, j) *
                               img(clampi(r + i - s, h - 1), clampi(c + j - s, w - 1));
            }
            out(r, c) = acc;
        }
    }
    return out;
}

/// The fixed 5x5 Laplacian-of-Gaussian mask. Zero-sum, symmetric under 90
/// degree rotation, center weight -16.
inline Kernel log_kernel_5x5() {
    return Kernel(5, {0, 0, 1,   0, 0,
                      0, 1, 2,   1, 0,
                      1, 2, -16, 2, 1,
                      0, 1, 2,   1, 0,
                      0, 0, 1,   0, 0});
}

inline Kernel sobel_x() { return Kernel(3, {-1, 0, 1, -2, 0, 2, -1, 0, 1}); }
inline Kernel sobel_y() { return Kernel(3, {-1, -2, -1, 0, 0, 0, 1, 2, 1}); }
inline Kernel prewitt_x() { return Kernel(3, {-1, 0, 1, -1, 0, 1, -1, 0, 1}); }
inline Kernel prewitt_y() { return Kernel(3, {-1, -1, -1, 0, 0, 0, 1, 1, 1}); }

/// First-derivative gradient planes; Sobel by default, Prewitt selectable.
inline GradientField gradient(const raster::Image& img, GradientOp op = GradientOp::sobel) {
    if (img.width() < 3 || img.height() < 3)
        throw std::invalid_argument("gradient: image too small (needs >= 3x3)");
    if (op == GradientOp::sobel)
        return {convolve2d(img, sobel_x()), convolve2d(img, sobel_y())};
    return {convolve2d(img, prewitt_x()), convolve2d(img, prewitt_y())};
}

inline raster::Image gradient_magnitude(const GradientField& g) {
    raster::Image out(g.gx.width(), g.gx.height());
    for (int r = 0; r < out.height(); ++r)
        for (int c = 0; c < out.width(); ++c)
            out(r, c) = std::sqrt(g.gx(r, c) * g.gx(r, c) + g.gy(r, c) * g.gy(r, c));
    return out;
}

/// Per-pixel direction angle alpha = arctan(gy/gx) in (-pi/2, pi/2].
/// gx = 0 with gy != 0 maps to pi/2; a fully vanished gradient maps to the
/// sentinel 0 and sets the zero_gradient bit.
inline AngleField gradient_direction(const GradientField& g) {
    const int w = g.gx.width(), h = g.gx.height();
    AngleField out{raster::Image(w, h), BinaryMap(w, h)};
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const double gx = g.gx(r, c), gy = g.gy(r, c);
            if (gx == 0.0 && gy == 0.0) {
                out.angles(r, c) = 0.0;
                out.zero_gradient.set(r, c, true);
            } else if (gx == 0.0) {
                out.angles(r, c) = kHalfPi;
            } else {
                out.angles(r, c) = std::atan(gy / gx);
            }
        }
    }
    return out;
}

/// Angle of the edge through a pixel, perpendicular to the gradient
/// direction alpha, folded into [0, pi/2]: pi/2 - |alpha|.
inline double edge_normal_angle(double alpha) {
    return kHalfPi - std::abs(alpha);
}

/// bit(r,c) = |img(r,c)| >= t. Magnitude comparison keeps both lobes of the
/// signed Laplacian response.
inline BinaryMap binary_threshold(const raster::Image& img, double t) {
    if (!(t >= 0.0))
        throw std::invalid_argument("binary_threshold: threshold must be >= 0");
    BinaryMap out(img.width(), img.height());
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c)
            out.set(r, c, std::abs(img(r, c)) >= t);
    return out;
}

inline double max_abs(const raster::Image& img) {
    double m = 0.0;
    for (double v : img.pixels()) m = std::max(m, std::abs(v));
    return m;
}

/// t = factor * max|response|. Returns 0 for an all-zero response; callers
/// treat that as "no signal" rather than thresholding at 0.
inline double auto_threshold(const raster::Image& response,
                             double factor = kAutoThresholdFactor) {
    return factor * max_abs(response);
}

}  // namespace mtfedge::detect
