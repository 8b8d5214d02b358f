#pragma once

// Grayscale raster storage plus the PGM codec used as the interchange
// format by the rest of the library. Intensities are kept as doubles even
// for 8-bit sources; derivative filters downstream need signed fractional
// values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtfedge::raster {

/// Thrown for unreadable, malformed, or truncated image data.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// 0-based (row, col), origin at the top-left pixel.
struct PixelCoord {
    int row = 0;
    int col = 0;

    friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// Row-major grayscale raster. Treat instances shared across threads as
/// immutable; every operation in this library returns a new image.
class Image {
public:
    Image() = default;

    Image(int width, int height, double fill = 0.0)
        : width_(width), height_(height) {
        if (width < 1 || height < 1)
            throw std::invalid_argument("Image: dimensions must be >= 1");
        if (!std::isfinite(fill))
            throw std::invalid_argument("Image: intensities must be finite");
        pixels_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    Image(int width, int height, std::vector<double> pixels)
        : width_(width), height_(height), pixels_(std::move(pixels)) {
        if (width < 1 || height < 1)
            throw std::invalid_argument("Image: dimensions must be >= 1");
        if (pixels_.size() != static_cast<std::size_t>(width) * height)
            throw std::invalid_argument("Image: pixel count does not match dimensions");
        for (double v : pixels_)
            if (!std::isfinite(v))
                throw std::invalid_argument("Image: intensities must be finite");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    double operator()(int r, int c) const {
        return pixels_[static_cast<std::size_t>(r) * width_ + c];
    }
    double& operator()(int r, int c) {
        return pixels_[static_cast<std::size_t>(r) * width_ + c];
    }

    bool in_bounds(int r, int c) const noexcept {
        return r >= 0 && r < height_ && c >= 0 && c < width_;
    }

    std::span<const double> pixels() const noexcept { return pixels_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> pixels_;
};

namespace detail {

// Header tokenizer shared by the in-memory parser and the tile reader.
// PGM headers are whitespace-separated tokens; '#' starts a comment that
// runs to end of line.
class PnmTokenizer {
public:
    explicit PnmTokenizer(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::string next_token() {
        skip_ws_and_comments();
        if (pos_ >= bytes_.size())
            throw IoError("pgm: malformed header (unexpected end of data)");
        std::string tok;
        while (pos_ < bytes_.size() && !is_space(bytes_[pos_]) && bytes_[pos_] != '#')
            tok.push_back(static_cast<char>(bytes_[pos_++]));
        return tok;
    }

    int next_int(const char* what) {
        const std::string tok = next_token();
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(tok, &used);
        } catch (const std::exception&) {
            throw IoError(std::string("pgm: malformed header (bad ") + what + ")");
        }
        if (used != tok.size() || v < 0 || v > 0x7fffffff)
            throw IoError(std::string("pgm: malformed header (bad ") + what + ")");
        return static_cast<int>(v);
    }

    // Consumes the single whitespace byte that separates maxval from a
    // binary payload.
    void expect_single_ws() {
        if (pos_ >= bytes_.size() || !is_space(bytes_[pos_]))
            throw IoError("pgm: malformed header (missing payload separator)");
        ++pos_;
    }

    std::size_t pos() const noexcept { return pos_; }
    std::span<const std::uint8_t> rest() const { return bytes_.subspan(pos_); }
    bool at_end() {
        skip_ws_and_comments();
        return pos_ >= bytes_.size();
    }

private:
    static bool is_space(std::uint8_t b) {
        return b == ' ' || b == '\t' || b == '\n' || b == '\r' || b == '\f' || b == '\v';
    }

    void skip_ws_and_comments() {
        while (pos_ < bytes_.size()) {
            if (is_space(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

struct PgmHeader {
    bool binary = false;  // P5 vs P2
    int width = 0;
    int height = 0;
    int maxval = 0;
    std::size_t payload_offset = 0;  // meaningful for P5 only
};

inline PgmHeader parse_pgm_header(PnmTokenizer& tok) {
    PgmHeader h;
    const std::string magic = tok.next_token();
    if (magic == "P5")
        h.binary = true;
    else if (magic == "P2")
        h.binary = false;
    else
        throw IoError("pgm: unsupported magic '" + magic + "' (expected P5 or P2)");
    h.width = tok.next_int("width");
    h.height = tok.next_int("height");
    h.maxval = tok.next_int("maxval");
    if (h.width < 1 || h.height < 1)
        throw IoError("pgm: malformed header (dimensions must be >= 1)");
    if (static_cast<long long>(h.width) * h.height > (1ll << 31))
        throw IoError("pgm: image too large");
    if (h.maxval < 1 || h.maxval > 65535)
        throw IoError("pgm: unsupported maxval " + std::to_string(h.maxval));
    if (h.binary) {
        tok.expect_single_ws();
        h.payload_offset = tok.pos();
    }
    return h;
}

}  // namespace detail

/// Decodes a binary (P5) or ASCII (P2) PGM. Sample values are stored as-is,
/// without rescaling; 16-bit samples are big-endian per the Netpbm spec.
inline Image load_pgm(std::span<const std::uint8_t> bytes) {
    detail::PnmTokenizer tok(bytes);
    const detail::PgmHeader h = detail::parse_pgm_header(tok);
    const std::size_t count = static_cast<std::size_t>(h.width) * h.height;
    std::vector<double> px;
    px.reserve(count);
    if (h.binary) {
        const auto payload = tok.rest();
        const int bpp = h.maxval > 255 ? 2 : 1;
        if (payload.size() < count * bpp)
            throw IoError("pgm: truncated pixel data");
        if (bpp == 1) {
            for (std::size_t i = 0; i < count; ++i)
                px.push_back(static_cast<double>(payload[i]));
        } else {
            for (std::size_t i = 0; i < count; ++i)
                px.push_back(static_cast<double>((payload[2 * i] << 8) | payload[2 * i + 1]));
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            if (tok.at_end())
                throw IoError("pgm: truncated pixel data");
            px.push_back(static_cast<double>(tok.next_int("sample")));
        }
    }
    return Image(h.width, h.height, std::move(px));
}

inline Image load_pgm(const std::vector<std::uint8_t>& bytes) {
    return load_pgm(std::span<const std::uint8_t>(bytes));
}

/// Encodes a binary (P5) PGM. maxval must be 255 or 65535; intensities are
/// clamped to [0, maxval] and rounded to the nearest integer.
inline std::vector<std::uint8_t> write_pgm(const Image& img, int maxval) {
    if (maxval != 255 && maxval != 65535)
        throw std::invalid_argument("write_pgm: maxval must be 255 or 65535");
    std::string header = "P5\n" + std::to_string(img.width()) + " " +
                         std::to_string(img.height()) + "\n" + std::to_string(maxval) + "\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    const std::size_t count = static_cast<std::size_t>(img.width()) * img.height();
    out.reserve(out.size() + count * (maxval > 255 ? 2 : 1));
    for (double v : img.pixels()) {
        const long s = std::lround(std::clamp(v, 0.0, static_cast<double>(maxval)));
        if (maxval > 255) {
            out.push_back(static_cast<std::uint8_t>((s >> 8) & 0xff));
            out.push_back(static_cast<std::uint8_t>(s & 0xff));
        } else {
            out.push_back(static_cast<std::uint8_t>(s));
        }
    }
    return out;
}

/// Copies the window [top, top+h) x [left, left+w); the window must lie
/// fully inside the image.
inline Image crop(const Image& img, int top, int left, int h, int w) {
    if (h < 1 || w < 1 || top < 0 || left < 0 || top + h > img.height() ||
        left + w > img.width())
        throw std::invalid_argument("crop: window out of bounds");
    Image out(w, h);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            out(r, c) = img(top + r, left + c);
    return out;
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

inline Image load_pgm_file(const std::filesystem::path& path) {
    return load_pgm(read_file(path));
}

inline void write_pgm_file(const Image& img, int maxval, const std::filesystem::path& path) {
    write_file(path, write_pgm(img, maxval));
}

/// Random access to rectangular windows of a binary (P5) PGM on disk, so a
/// raster larger than memory can be processed tile by tile. Each read opens
/// its own stream, so one reader may serve concurrent callers.
class PgmTileReader {
public:
    explicit PgmTileReader(std::filesystem::path path) : path_(std::move(path)) {
        std::ifstream in(path_, std::ios::binary);
        if (!in)
            throw IoError("cannot open " + path_.string());
        std::vector<std::uint8_t> head(4096);
        in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
        head.resize(static_cast<std::size_t>(in.gcount()));
        detail::PnmTokenizer tok(head);
        header_ = detail::parse_pgm_header(tok);
        if (!header_.binary)
            throw IoError("PgmTileReader: only binary (P5) PGM supports window reads");
        in.seekg(0, std::ios::end);
        const auto file_size = static_cast<std::size_t>(in.tellg());
        const std::size_t need = static_cast<std::size_t>(header_.width) * header_.height *
                                 bytes_per_sample();
        if (file_size < header_.payload_offset + need)
            throw IoError("pgm: truncated pixel data");
    }

    int width() const noexcept { return header_.width; }
    int height() const noexcept { return header_.height; }
    int maxval() const noexcept { return header_.maxval; }

    Image read_window(int top, int left, int h, int w) const {
        if (h < 1 || w < 1 || top < 0 || left < 0 || top + h > header_.height ||
            left + w > header_.width)
            throw std::invalid_argument("read_window: window out of bounds");
        std::ifstream in(path_, std::ios::binary);
        if (!in)
            throw IoError("cannot open " + path_.string());
        const int bpp = bytes_per_sample();
        std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * bpp);
        Image out(w, h);
        for (int r = 0; r < h; ++r) {
            const std::size_t off =
                header_.payload_offset +
                (static_cast<std::size_t>(top + r) * header_.width + left) * bpp;
            in.seekg(static_cast<std::streamoff>(off));
            in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
            if (!in)
                throw IoError("pgm: read failed at row " + std::to_string(top + r));
            for (int c = 0; c < w; ++c)
                out(r, c) = bpp == 2
                                ? static_cast<double>((row[2 * c] << 8) | row[2 * c + 1])
                                : static_cast<double>(row[c]);
        }
        return out;
    }

private:
    int bytes_per_sample() const noexcept { return header_.maxval > 255 ? 2 : 1; }

    std::filesystem::path path_;
    detail::PgmHeader header_;
};

}  // namespace mtfedge::raster
