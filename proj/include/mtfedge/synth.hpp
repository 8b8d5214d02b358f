#pragma once

// Synthetic edge targets with known geometry and blur, plus closed-form
// reference curves for validating measured MTFs.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>

#include "mtfedge/raster.hpp"

namespace mtfedge::synth {

/// Identifier of the noise generator, echoed in reports so noisy renders
/// can be reproduced bit for bit.
inline constexpr const char* kNoiseAlgorithm = "mt19937_64+box-muller";

/// A straight edge through an image: edge_angle is measured from the x-axis
/// (pi/2 = vertical), edge_offset is the signed perpendicular distance of
/// the line from the image center in pixels, and the intensity ramps from
/// low to high across the line with an error-function profile of width
/// blur_sigma (a hard step at blur_sigma = 0).
struct EdgeTarget {
    int width = 256;
    int height = 256;
    double edge_angle = std::numbers::pi / 2.0;
    double edge_offset = 0.0;
    double low = 0.0;
    double high = 200.0;
    double blur_sigma = 0.0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 1;
};

namespace detail {

inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0);
}

// Deterministic unit gaussians: one Box-Muller value per call, two raw
// mt19937_64 draws each, independent of any stdlib distribution internals.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace detail

inline void validate(const EdgeTarget& t) {
    if (t.width < 1 || t.height < 1)
        throw std::invalid_argument("EdgeTarget: dimensions must be >= 1");
    if (!(t.low < t.high))
        throw std::invalid_argument("EdgeTarget: low must be < high");
    if (!(t.edge_angle > 0.0 && t.edge_angle <= std::numbers::pi / 2.0 + 1e-12))
        throw std::invalid_argument("EdgeTarget: edge_angle must be in (0, pi/2]");
    if (t.blur_sigma < 0.0 || !std::isfinite(t.blur_sigma))
        throw std::invalid_argument("EdgeTarget: blur_sigma must be >= 0");
    if (t.noise_sigma < 0.0 || !std::isfinite(t.noise_sigma))
        throw std::invalid_argument("EdgeTarget: noise_sigma must be >= 0");
    if (t.blur_sigma > 0.0 &&
        4.0 * t.blur_sigma >= std::min(t.width, t.height) / 2.0)
        throw std::invalid_argument("EdgeTarget: blur support exceeds image");
}

/// Renders the target. Pixel centers sit at (col + 0.5, row + 0.5); the
/// signed distance d of a center from the edge line maps to
/// low + (high - low) * Phi(d / blur_sigma), or a hard step at sigma 0
/// (high where d >= 0). Additive gaussian noise, when requested, is drawn
/// in row-major order from a stream seeded with target.seed.
inline raster::Image render(const EdgeTarget& t) {
    validate(t);
    const double cx = t.width / 2.0, cy = t.height / 2.0;
    double nx = std::sin(t.edge_angle);
    double ny = -std::cos(t.edge_angle);
    if (std::abs(ny) < 1e-15) {  // keep exactly vertical edges column-pure
        nx = 1.0;
        ny = 0.0;
    }
    raster::Image img(t.width, t.height);
    for (int r = 0; r < t.height; ++r) {
        const double y = r + 0.5;
        for (int c = 0; c < t.width; ++c) {
            const double x = c + 0.5;
            const double d = nx * (x - cx) + ny * (y - cy) - t.edge_offset;
            img(r, c) = t.blur_sigma == 0.0
                            ? (d >= 0.0 ? t.high : t.low)
                            : t.low + (t.high - t.low) *
                                          detail::normal_cdf(d / t.blur_sigma);
        }
    }
    if (t.noise_sigma > 0.0) {
        detail::GaussianStream noise(t.seed);
        for (int r = 0; r < t.height; ++r)
            for (int c = 0; c < t.width; ++c)
                img(r, c) += t.noise_sigma * noise.next();
    }
    return img;
}

/// MTF of a continuous gaussian line spread of width sigma:
/// exp(-2 pi^2 sigma^2 f^2).
inline double analytic_gaussian_mtf(double sigma, double f) {
    const double pf = std::numbers::pi * f;
    return std::exp(-2.0 * pf * pf * sigma * sigma);
}

/// Gaussian MTF with the |sinc| factor from unit box sampling and forward
/// differencing; the curve a pixel-sampled measurement of a gaussian edge
/// should reproduce.
inline double sampled_model_mtf(double sigma, double f) {
    const double sinc = f == 0.0 ? 1.0
                                 : std::sin(std::numbers::pi * f) /
                                       (std::numbers::pi * f);
    return analytic_gaussian_mtf(sigma, f) * std::abs(sinc);
}

/// Frequency where the analytic gaussian MTF reaches 0.5; empty at sigma 0
/// (the curve is identically 1).
inline std::optional<double> analytic_mtf50(double sigma) {
    if (sigma <= 0.0) return std::nullopt;
    return std::sqrt(std::numbers::ln2 / 2.0) / (std::numbers::pi * sigma);
}

}  // namespace mtfedge::synth
