#pragma once

// Command implementations behind the mtfedge tool. Kept in a header so the
// test suites drive exactly the code paths the binary ships.
//
// Output conventions: the machine-readable table (CSV or JSON) goes to the
// --out file when given, otherwise to the primary stream; summaries, timings
// and diagnostics go to the secondary stream. All numeric formatting is
// fixed-width so outputs are byte-deterministic for a given input and
// configuration.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mtfedge/batch.hpp"
#include "mtfedge/mtf.hpp"
#include "mtfedge/pipeline.hpp"
#include "mtfedge/png.hpp"
#include "mtfedge/raster.hpp"
#include "mtfedge/segment.hpp"
#include "mtfedge/synth.hpp"

namespace mtfedge::cli {

using pipeline::PipelineConfig;

// Exit codes, documented in the tool's help text.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIoError = 2;
inline constexpr int kExitNoEdges = 3;
inline constexpr int kExitBadConfig = 4;

inline std::string strprintf(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    char buf[256];
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    return buf;
}

/// Loads PGM or PNG, dispatching on the magic bytes.
inline raster::Image load_image(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = raster::read_file(path);
    if (raster::looks_like_png(bytes)) return raster::load_png(bytes);
    return raster::load_pgm(bytes);
}

inline std::string format_rank_csv(const segment::RankVector& sorted) {
    std::string out = "edge_rank,edge_length,start_row,start_col,thickness,theta_rad\n";
    for (const segment::EdgeSegment& s : sorted.segments)
        out += strprintf("%.4f,%d,%d,%d,%.4f,%.6f\n", s.rank_r, s.length_l,
                         s.start.row, s.start.col, s.thickness_t, s.theta);
    return out;
}

inline nlohmann::json segment_to_json(const segment::EdgeSegment& s) {
    return {{"rank", s.rank_r},        {"length", s.length_l},
            {"start_row", s.start.row}, {"start_col", s.start.col},
            {"thickness", s.thickness_t}, {"theta_rad", s.theta}};
}

inline std::string format_rank_json(const segment::RankVector& sorted) {
    nlohmann::json j;
    j["segments"] = nlohmann::json::array();
    for (const segment::EdgeSegment& s : sorted.segments)
        j["segments"].push_back(segment_to_json(s));
    j["best"] = sorted.empty() ? nlohmann::json()
                               : segment_to_json(segment::best_edge(sorted));
    return j.dump(2) + "\n";
}

inline std::string format_best_summary(const segment::EdgeSegment& s) {
    return strprintf("best: rank=%.4f length=%d start=(%d,%d) thickness=%.4f theta=%.6f\n",
                     s.rank_r, s.length_l, s.start.row, s.start.col, s.thickness_t,
                     s.theta);
}

inline std::string format_mtf_csv(const mtf::MtfCurve& curve) {
    std::string out = "frequency_cpp,modulation\n";
    for (const mtf::MtfPoint& p : curve.points)
        out += strprintf("%.6f,%.6f\n", p.frequency, p.modulation);
    return out;
}

/// Minimal standalone SVG line plot of the curve; no plotting dependency.
inline std::string render_mtf_svg(const mtf::MtfCurve& curve) {
    constexpr int kW = 640, kH = 480, kMargin = 56;
    const double plot_w = kW - 2 * kMargin, plot_h = kH - 2 * kMargin;
    double ymax = 1.0;
    for (const mtf::MtfPoint& p : curve.points) ymax = std::max(ymax, p.modulation);
    auto sx = [&](double f) { return kMargin + plot_w * f / 0.5; };
    auto sy = [&](double m) { return kH - kMargin - plot_h * m / ymax; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
        << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double f = 0.1 * i;
        svg << strprintf("<line x1=\"%.1f\" y1=\"%d\" x2=\"%.1f\" y2=\"%d\" "
                         "stroke=\"#ccc\"/>\n",
                         sx(f), kMargin, sx(f), kH - kMargin);
        svg << strprintf("<text x=\"%.1f\" y=\"%d\" font-size=\"12\" "
                         "text-anchor=\"middle\">%.1f</text>\n",
                         sx(f), kH - kMargin + 16, f);
    }
    for (int i = 0; i <= 4; ++i) {
        const double m = ymax * i / 4.0;
        svg << strprintf("<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" "
                         "stroke=\"#ccc\"/>\n",
                         kMargin, sy(m), kW - kMargin, sy(m));
        svg << strprintf("<text x=\"%d\" y=\"%.1f\" font-size=\"12\" "
                         "text-anchor=\"end\">%.2f</text>\n",
                         kMargin - 6, sy(m) + 4, m);
    }
    svg << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"";
    for (const mtf::MtfPoint& p : curve.points)
        svg << strprintf("%.2f,%.2f ", sx(p.frequency), sy(p.modulation));
    svg << "\"/>\n";
    svg << "<text x=\"" << kW / 2
        << "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">MTF (modulation vs "
           "cycles/pixel)</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

namespace detail {

inline bool write_text(const std::filesystem::path& path, const std::string& text,
                       std::ostream& diag) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        diag << "error: cannot open " << path.string() << " for writing\n";
        return false;
    }
    out << text;
    return static_cast<bool>(out);
}

inline bool emit_table(const std::string& table,
                       const std::optional<std::filesystem::path>& path,
                       std::ostream& out, std::ostream& diag) {
    if (path) return write_text(*path, table, diag);
    out << table;
    return true;
}

}  // namespace detail

/// Worker count: explicit request wins, then MTFEDGE_THREADS, then the
/// hardware thread count, then 1.
inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MTFEDGE_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

struct RankOptions {
    std::filesystem::path input;
    PipelineConfig cfg;
    std::string format = "csv";  // csv | json
    std::optional<std::filesystem::path> out;
};

struct BatchOptions {
    std::filesystem::path input;
    PipelineConfig cfg;
    std::string format = "csv";
    std::optional<std::filesystem::path> out;
    bool stream = false;  // read tile windows lazily from a P5 PGM
};

struct MtfOptions {
    std::filesystem::path input;
    PipelineConfig cfg;
    std::optional<std::filesystem::path> out_csv;
    std::optional<std::filesystem::path> out_svg;
};

struct SynthOptions {
    synth::EdgeTarget target;
    std::filesystem::path out;
    int maxval = 255;
};

/// Detect, rank and list every segment (descending rank); echoes the best
/// edge. Coordinates are 0-based (row, col) from the top-left pixel.
inline int cmd_rank(const RankOptions& opt, std::ostream& out, std::ostream& diag) {
    raster::Image img;
    try {
        img = load_image(opt.input);
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return kExitIoError;
    }
    segment::RankVector sorted;
    try {
        sorted = segment::sort_ranked(pipeline::run_pipeline(img, opt.cfg));
    } catch (const std::invalid_argument& e) {
        diag << "error: " << e.what() << "\n";
        return kExitBadConfig;
    }
    const std::string table =
        opt.format == "json" ? format_rank_json(sorted) : format_rank_csv(sorted);
    if (!detail::emit_table(table, opt.out, out, diag)) return kExitIoError;
    if (sorted.empty()) {
        diag << "no edges found\n";
        return kExitNoEdges;
    }
    diag << format_best_summary(segment::best_edge(sorted));
    return kExitOk;
}

/// Same table as cmd_rank, computed tile-parallel; adds tile/timing
/// diagnostics. Output is identical to cmd_rank for any worker count.
inline int cmd_batch(const BatchOptions& opt, std::ostream& out, std::ostream& diag) {
    const auto t0 = std::chrono::steady_clock::now();
    const int workers = resolve_workers(opt.cfg.workers);
    batch::BatchReport report;
    try {
        if (opt.stream) {
            const raster::PgmTileReader reader(opt.input);
            const auto tiles = batch::plan_tiles(reader.width(), reader.height(),
                                                 opt.cfg.tile, opt.cfg.max_len);
            report = batch::process_tiles(reader, tiles, opt.cfg, workers);
        } else {
            const raster::Image img = load_image(opt.input);
            const auto tiles = batch::plan_tiles(img.width(), img.height(),
                                                 opt.cfg.tile, opt.cfg.max_len);
            report = batch::process_tiles(img, tiles, opt.cfg, workers);
        }
    } catch (const raster::IoError& e) {
        diag << "error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const std::invalid_argument& e) {
        diag << "error: " << e.what() << "\n";
        return kExitBadConfig;
    }
    const auto wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();

    const segment::RankVector sorted = segment::sort_ranked(report.merged);
    const std::string table =
        opt.format == "json" ? format_rank_json(sorted) : format_rank_csv(sorted);
    if (!detail::emit_table(table, opt.out, out, diag)) return kExitIoError;

    diag << "tiles_processed: " << report.tiles_processed << " (workers " << workers
         << ")\n";
    double tile_total = 0.0, tile_max = 0.0;
    for (double ms : report.tile_ms) {
        tile_total += ms;
        tile_max = std::max(tile_max, ms);
    }
    diag << strprintf("wall_ms: %.1f  tile_ms_total: %.1f  tile_ms_max: %.1f\n",
                      wall_ms, tile_total, tile_max);
    if (report.truncated_segments > 0)
        diag << "warning: " << report.truncated_segments
             << " segment(s) hit the halo edge; raise --max-len for exact results\n";
    if (sorted.empty()) {
        diag << "no edges found\n";
        return kExitNoEdges;
    }
    diag << format_best_summary(*report.best);
    return kExitOk;
}

/// Full measurement: best edge -> ESF -> LSF -> MTF table, plus the MTF50
/// summary ("no crossing" when the curve stays above 0.5).
inline int cmd_mtf(const MtfOptions& opt, std::ostream& out, std::ostream& diag) {
    raster::Image img;
    try {
        img = load_image(opt.input);
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return kExitIoError;
    }
    segment::RankVector rv;
    try {
        rv = pipeline::run_pipeline(img, opt.cfg);
    } catch (const std::invalid_argument& e) {
        diag << "error: " << e.what() << "\n";
        return kExitBadConfig;
    }
    if (rv.empty()) {
        diag << "error: no usable edge in input\n";
        return kExitNoEdges;
    }
    const segment::EdgeSegment best = segment::best_edge(rv);
    mtf::MtfCurve curve;
    try {
        const mtf::EsfProfile esf = mtf::extract_esf(img, best, opt.cfg.half_window);
        curve = mtf::mtf_from_lsf(mtf::lsf_from_esf(esf));
    } catch (const mtf::ZeroDcError& e) {
        diag << "error: " << e.what() << "\n";
        return kExitNoEdges;
    } catch (const std::invalid_argument& e) {
        diag << "error: " << e.what()
             << " (a smaller --half-window may fit the image)\n";
        return kExitNoEdges;
    }

    if (!detail::emit_table(format_mtf_csv(curve), opt.out_csv, out, diag))
        return kExitIoError;
    if (opt.out_svg && !detail::write_text(*opt.out_svg, render_mtf_svg(curve), diag))
        return kExitIoError;

    diag << format_best_summary(best);
    if (const auto f50 = mtf::mtf50(curve))
        out << strprintf("mtf50_cycles_per_pixel: %.6f\n", *f50);
    else
        out << "mtf50_cycles_per_pixel: no crossing\n";
    return kExitOk;
}

/// Renders an edge target to PGM and echoes the analytic MTF50 its blur
/// implies, for comparison against the measured curve.
inline int cmd_synth(const SynthOptions& opt, std::ostream& out, std::ostream& diag) {
    if (opt.maxval != 255 && opt.maxval != 65535) {
        diag << "error: maxval must be 255 or 65535\n";
        return kExitBadConfig;
    }
    raster::Image img;
    try {
        img = synth::render(opt.target);
    } catch (const std::invalid_argument& e) {
        diag << "error: " << e.what() << "\n";
        return kExitBadConfig;
    }
    try {
        raster::write_pgm_file(img, opt.maxval, opt.out);
    } catch (const raster::IoError& e) {
        diag << "error: " << e.what() << "\n";
        return kExitIoError;
    }
    out << "wrote " << opt.out.string() << " (" << img.width() << "x" << img.height()
        << ", maxval " << opt.maxval << ")\n";
    if (const auto f50 = synth::analytic_mtf50(opt.target.blur_sigma))
        out << strprintf("analytic_mtf50_cycles_per_pixel: %.6f\n", *f50);
    else
        out << "analytic_mtf50_cycles_per_pixel: no crossing (sigma 0)\n";
    if (opt.target.noise_sigma > 0.0)
        out << "noise: " << synth::kNoiseAlgorithm << " seed " << opt.target.seed
            << "\n";
    return kExitOk;
}

}  // namespace mtfedge::cli
