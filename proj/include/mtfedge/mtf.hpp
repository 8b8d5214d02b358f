#pragma once

// Edge profile to modulation transfer function: sample the edge spread
// function across the selected segment, differentiate to the line spread
// function, and take the magnitude of its DFT normalized at DC.

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mtfedge/raster.hpp"
#include "mtfedge/segment.hpp"

namespace mtfedge::mtf {

inline constexpr int kDefaultHalfWindow = 8;

/// Thrown when the line spread function has no DC component, i.e. the
/// profile carries no contrast to normalize against.
struct ZeroDcError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EsfProfile {
    std::vector<double> samples;
    double spacing = 1.0;  // pixels per sample
};

struct LsfProfile {
    std::vector<double> samples;  // one fewer than the ESF (forward difference)
    double spacing = 1.0;
};

struct MtfPoint {
    double frequency = 0;   // cycles/pixel, [0, 0.5]
    double modulation = 0;  // dimensionless, 1 at DC after normalization
};

struct MtfCurve {
    std::vector<MtfPoint> points;
};

enum class DiffMode { forward, central };

/// Samples the edge spread function across a segment. Each row of the chain
/// is shifted so its traced column lines up, removing the slant, and the
/// window [-half_window, +half_window] around that column is averaged over
/// the rows. spacing is 1.0 (row sampling at pixel pitch).
inline EsfProfile extract_esf(const raster::Image& img,
                              const segment::EdgeSegment& seg,
                              int half_window = kDefaultHalfWindow) {
    if (half_window < 2)
        throw std::invalid_argument("extract_esf: half_window must be >= 2");
    if (seg.length_l < 2)
        throw std::invalid_argument("extract_esf: segment shorter than 2 rows");
    if (static_cast<int>(seg.cols.size()) != seg.length_l)
        throw std::invalid_argument("extract_esf: segment lacks per-row columns");
    for (int i = 0; i < seg.length_l; ++i) {
        const int r = seg.start.row + i, c = seg.cols[i];
        if (r < 0 || r >= img.height() || c - half_window < 0 ||
            c + half_window >= img.width())
            throw std::invalid_argument("extract_esf: window exits image");
    }

    EsfProfile esf;
    esf.spacing = 1.0;
    esf.samples.reserve(2 * half_window + 1);
    for (int d = -half_window; d <= half_window; ++d) {
        double sum = 0.0;
        for (int i = 0; i < seg.length_l; ++i)
            sum += img(seg.start.row + i, seg.cols[i] + d);
        esf.samples.push_back(sum / seg.length_l);
    }
    return esf;
}

/// First derivative of the ESF. Forward difference by default:
/// LSF[i] = (ESF[i+1] - ESF[i]) / spacing, giving N-1 samples whose sum
/// telescopes to (ESF[last] - ESF[first]) / spacing. Central difference is
/// available for comparison and yields N-2 samples.
inline LsfProfile lsf_from_esf(const EsfProfile& esf, DiffMode mode = DiffMode::forward) {
    if (esf.samples.size() < 4)
        throw std::invalid_argument("lsf_from_esf: need at least 4 ESF samples");
    LsfProfile lsf;
    lsf.spacing = esf.spacing;
    if (mode == DiffMode::forward) {
        lsf.samples.reserve(esf.samples.size() - 1);
        for (std::size_t i = 0; i + 1 < esf.samples.size(); ++i)
            lsf.samples.push_back((esf.samples[i + 1] - esf.samples[i]) / esf.spacing);
    } else {
        lsf.samples.reserve(esf.samples.size() - 2);
        for (std::size_t i = 1; i + 1 < esf.samples.size(); ++i)
            lsf.samples.push_back((esf.samples[i + 1] - esf.samples[i - 1]) /
                                  (2.0 * esf.spacing));
    }
    return lsf;
}

/// Magnitude of the DFT of the LSF at bins 0..N/2, normalized by the DC
/// magnitude. Bin u is emitted at frequency u / (N * spacing) cycles/pixel,
/// so the last bin sits at or below Nyquist (0.5 at unit spacing).
inline MtfCurve mtf_from_lsf(const LsfProfile& lsf) {
    const int n = static_cast<int>(lsf.samples.size());
    if (n < 3)
        throw std::invalid_argument("mtf_from_lsf: need at least 3 LSF samples");

    MtfCurve curve;
    curve.points.reserve(n / 2 + 1);
    for (int u = 0; u <= n / 2; ++u) {
        double re = 0.0, im = 0.0;
        for (int k = 0; k < n; ++k) {
            const double ang = -2.0 * std::numbers::pi * u * k / n;
            re += lsf.samples[k] * std::cos(ang);
            im += lsf.samples[k] * std::sin(ang);
        }
        curve.points.push_back({u / (n * lsf.spacing), std::hypot(re, im)});
    }
    const double dc = curve.points.front().modulation;
    if (dc == 0.0)
        throw ZeroDcError("mtf_from_lsf: zero DC component (contrast-free edge)");
    for (MtfPoint& p : curve.points) p.modulation /= dc;
    return curve;
}

/// Smallest frequency where the modulation falls through 0.5, linearly
/// interpolated between the bracketing points. Empty when the curve never
/// crosses.
inline std::optional<double> mtf50(const MtfCurve& curve) {
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const MtfPoint& a = curve.points[i - 1];
        const MtfPoint& b = curve.points[i];
        if (b.modulation <= 0.5) {
            if (a.modulation == b.modulation) return b.frequency;
            const double t = (a.modulation - 0.5) / (a.modulation - b.modulation);
            return a.frequency + t * (b.frequency - a.frequency);
        }
    }
    return std::nullopt;
}

}  // namespace mtfedge::mtf
