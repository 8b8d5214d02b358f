// mtfedge: rank edges in a grayscale raster, measure the MTF across the
// best one, and scale to large rasters with a deterministic tiled mode.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mtfedge/cli.hpp"

namespace {

using mtfedge::cli::PipelineConfig;

constexpr const char* kFooter =
    "Coordinates are 0-based (row, col) with the origin at the top-left pixel.\n"
    "Exit codes: 0 success, 2 I/O error, 3 no edges found, 4 invalid "
    "configuration.\n"
    "MTFEDGE_THREADS sets the default worker count for batch mode.";

struct ConfigFlags {
    std::string threshold = "auto";
    std::string scan_mode = "maximal-runs";
    std::string gradient = "sobel";
    PipelineConfig cfg;

    void attach(CLI::App* cmd) {
        cmd->add_option("--threshold", threshold,
                        "Threshold on |LoG response|: a number, or 'auto' for 0.2 x "
                        "max|response|")
            ->capture_default_str();
        cmd->add_option("--min-len", cfg.min_len, "Minimum segment length in rows")
            ->capture_default_str();
        cmd->add_option("--scan-mode", scan_mode, "Segment scan mode")
            ->check(CLI::IsMember({"maximal-runs", "per-pixel-runs"}))
            ->capture_default_str();
        cmd->add_option("--gradient", gradient, "Gradient operator")
            ->check(CLI::IsMember({"sobel", "prewitt"}))
            ->capture_default_str();
        cmd->add_option("--half-window", cfg.half_window,
                        "ESF half window in pixels (mtf command)")
            ->capture_default_str();
        cmd->add_option("--rank-divisor", cfg.rank_divisor,
                        "Divisor in the rank formula (l - t)/divisor + |theta|")
            ->capture_default_str();
        cmd->add_option("--tile", cfg.tile, "Core tile size for batch mode")
            ->capture_default_str();
        cmd->add_option("--max-len", cfg.max_len,
                        "Longest segment batch mode traces exactly")
            ->capture_default_str();
        cmd->add_option("--workers", cfg.workers,
                        "Worker threads for batch mode (0 = MTFEDGE_THREADS or "
                        "hardware)")
            ->envname("MTFEDGE_THREADS")
            ->capture_default_str();
    }

    // Returns false (after printing) when a value cannot be parsed.
    bool resolve(std::ostream& diag) {
        if (threshold == "auto") {
            cfg.threshold.reset();
        } else {
            try {
                std::size_t used = 0;
                const double v = std::stod(threshold, &used);
                if (used != threshold.size()) throw std::invalid_argument(threshold);
                cfg.threshold = v;
            } catch (const std::exception&) {
                diag << "error: --threshold expects a number or 'auto'\n";
                return false;
            }
        }
        cfg.scan_mode = scan_mode == "per-pixel-runs"
                            ? mtfedge::segment::ScanMode::per_pixel_runs
                            : mtfedge::segment::ScanMode::maximal_runs;
        cfg.gradient_op = gradient == "prewitt" ? mtfedge::detect::GradientOp::prewitt
                                                : mtfedge::detect::GradientOp::sobel;
        return true;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Edge ranking and MTF measurement for grayscale rasters"};
    app.footer(kFooter);
    app.require_subcommand(1);

    // rank
    auto* rank_cmd = app.add_subcommand("rank", "Rank every detected edge segment");
    mtfedge::cli::RankOptions rank_opt;
    ConfigFlags rank_flags;
    rank_cmd->add_option("input", rank_opt.input, "PGM (P5/P2) or PNG image")
        ->required();
    rank_flags.attach(rank_cmd);
    rank_cmd->add_option("--format", rank_opt.format, "Table format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    std::string rank_out;
    rank_cmd->add_option("--out", rank_out, "Write the table to this file");

    // mtf
    auto* mtf_cmd =
        app.add_subcommand("mtf", "Measure the MTF across the best-ranked edge");
    mtfedge::cli::MtfOptions mtf_opt;
    ConfigFlags mtf_flags;
    mtf_cmd->add_option("input", mtf_opt.input, "PGM (P5/P2) or PNG image")
        ->required();
    mtf_flags.attach(mtf_cmd);
    std::string mtf_out, mtf_svg;
    mtf_cmd->add_option("--out", mtf_out, "Write frequency,modulation CSV here");
    mtf_cmd->add_option("--svg", mtf_svg, "Also write an SVG plot of the curve");

    // batch
    auto* batch_cmd = app.add_subcommand(
        "batch", "Rank edges tile-parallel; identical output to 'rank'");
    mtfedge::cli::BatchOptions batch_opt;
    ConfigFlags batch_flags;
    batch_cmd->add_option("input", batch_opt.input, "PGM (P5/P2) or PNG image")
        ->required();
    batch_flags.attach(batch_cmd);
    batch_cmd->add_option("--format", batch_opt.format, "Table format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    std::string batch_out;
    batch_cmd->add_option("--out", batch_out, "Write the table to this file");
    batch_cmd->add_flag("--stream", batch_opt.stream,
                        "Read tile windows lazily from a binary PGM instead of "
                        "loading it whole");

    // synth
    auto* synth_cmd =
        app.add_subcommand("synth", "Render a synthetic edge target to PGM");
    mtfedge::cli::SynthOptions synth_opt;
    double synth_angle_deg = 90.0;
    synth_cmd->add_option("--width", synth_opt.target.width, "Target width")
        ->capture_default_str();
    synth_cmd->add_option("--height", synth_opt.target.height, "Target height")
        ->capture_default_str();
    synth_cmd
        ->add_option("--angle", synth_angle_deg,
                     "Edge angle from the x-axis in degrees (90 = vertical)")
        ->capture_default_str();
    synth_cmd
        ->add_option("--offset", synth_opt.target.edge_offset,
                     "Signed distance of the edge from the image center, pixels")
        ->capture_default_str();
    synth_cmd->add_option("--low", synth_opt.target.low, "Dark-side intensity")
        ->capture_default_str();
    synth_cmd->add_option("--high", synth_opt.target.high, "Bright-side intensity")
        ->capture_default_str();
    synth_cmd->add_option("--sigma", synth_opt.target.blur_sigma,
                          "Gaussian edge blur in pixels")
        ->capture_default_str();
    synth_cmd->add_option("--noise", synth_opt.target.noise_sigma,
                          "Additive gaussian noise sigma")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth_opt.target.seed, "Noise seed")
        ->capture_default_str();
    synth_cmd->add_option("--maxval", synth_opt.maxval, "PGM maxval (255 or 65535)")
        ->capture_default_str();
    synth_cmd->add_option("--out", synth_opt.out, "Output PGM path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? mtfedge::cli::kExitOk : mtfedge::cli::kExitBadConfig;
    }

    if (rank_cmd->parsed()) {
        if (!rank_flags.resolve(std::cerr)) return mtfedge::cli::kExitBadConfig;
        rank_opt.cfg = rank_flags.cfg;
        if (!rank_out.empty()) rank_opt.out = rank_out;
        return mtfedge::cli::cmd_rank(rank_opt, std::cout, std::cerr);
    }
    if (mtf_cmd->parsed()) {
        if (!mtf_flags.resolve(std::cerr)) return mtfedge::cli::kExitBadConfig;
        mtf_opt.cfg = mtf_flags.cfg;
        if (!mtf_out.empty()) mtf_opt.out_csv = mtf_out;
        if (!mtf_svg.empty()) mtf_opt.out_svg = mtf_svg;
        return mtfedge::cli::cmd_mtf(mtf_opt, std::cout, std::cerr);
    }
    if (batch_cmd->parsed()) {
        if (!batch_flags.resolve(std::cerr)) return mtfedge::cli::kExitBadConfig;
        batch_opt.cfg = batch_flags.cfg;
        if (!batch_out.empty()) batch_opt.out = batch_out;
        return mtfedge::cli::cmd_batch(batch_opt, std::cout, std::cerr);
    }
    if (synth_cmd->parsed()) {
        synth_opt.target.edge_angle = synth_angle_deg * std::numbers::pi / 180.0;
        return mtfedge::cli::cmd_synth(synth_opt, std::cout, std::cerr);
    }
    return mtfedge::cli::kExitBadConfig;  // unreachable with require_subcommand(1)
}
