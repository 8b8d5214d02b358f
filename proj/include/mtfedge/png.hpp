#pragma once

// Read-only PNG ingestion: non-interlaced grayscale/RGB/RGBA at 8 or 16 bit,
// converted to luminance. PGM remains the normative interchange format; this
// exists so photographic test charts can be fed in directly.
//
// Requires zlib (link ZLIB::ZLIB).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <zlib.h>

#include "mtfedge/raster.hpp"

namespace mtfedge::raster {

namespace detail {

inline std::uint32_t read_be32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline std::vector<std::uint8_t> zlib_inflate(std::span<const std::uint8_t> in,
                                              std::size_t expected) {
    std::vector<std::uint8_t> out;
    out.reserve(expected);
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK)
        throw IoError("png: inflate init failed");
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    std::uint8_t buf[1 << 16];
    int ret = Z_OK;
    do {
        zs.next_out = buf;
        zs.avail_out = sizeof(buf);
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            throw IoError("png: corrupt compressed data");
        }
        out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
    } while (ret != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
    inflateEnd(&zs);
    if (ret != Z_STREAM_END || out.size() != expected)
        throw IoError("png: truncated compressed data");
    return out;
}

inline int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

}  // namespace detail

inline bool looks_like_png(std::span<const std::uint8_t> bytes) {
    static constexpr std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    if (bytes.size() < 8) return false;
    for (int i = 0; i < 8; ++i)
        if (bytes[i] != sig[i]) return false;
    return true;
}

/// Decodes a PNG into a luminance raster (Y = 0.299 R + 0.587 G + 0.114 B for
/// color inputs; gray samples pass through, alpha is discarded). Samples keep
/// their stored range: 0..255 at 8 bit, 0..65535 at 16 bit.
inline Image load_png(std::span<const std::uint8_t> bytes) {
    if (!looks_like_png(bytes))
        throw IoError("png: bad signature");

    std::uint32_t width = 0, height = 0;
    int bit_depth = 0, color_type = 0;
    bool seen_ihdr = false;
    std::vector<std::uint8_t> idat;

    std::size_t pos = 8;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t len = detail::read_be32(&bytes[pos]);
        if (pos + 12 + len > bytes.size())
            throw IoError("png: truncated chunk");
        const std::string type(bytes.begin() + pos + 4, bytes.begin() + pos + 8);
        const std::uint8_t* data = &bytes[pos + 8];
        if (type == "IHDR") {
            if (len != 13)
                throw IoError("png: bad IHDR");
            width = detail::read_be32(data);
            height = detail::read_be32(data + 4);
            bit_depth = data[8];
            color_type = data[9];
            if (data[10] != 0 || data[11] != 0)
                throw IoError("png: unsupported compression/filter method");
            if (data[12] != 0)
                throw IoError("png: interlaced images are not supported");
            seen_ihdr = true;
        } else if (type == "IDAT") {
            idat.insert(idat.end(), data, data + len);
        } else if (type == "IEND") {
            break;
        }
        // ancillary chunks (and PLTE, which we reject below via color_type) skipped
        pos += 12 + len;
    }
    if (!seen_ihdr || width == 0 || height == 0)
        throw IoError("png: missing or empty IHDR");
    if (static_cast<std::uint64_t>(width) * height > (1ull << 31))
        throw IoError("png: image too large");
    if (bit_depth != 8 && bit_depth != 16)
        throw IoError("png: only 8- and 16-bit depths are supported");

    int channels = 0;
    switch (color_type) {
        case 0: channels = 1; break;  // gray
        case 2: channels = 3; break;  // rgb
        case 4: channels = 2; break;  // gray + alpha
        case 6: channels = 4; break;  // rgba
        default:
            throw IoError("png: unsupported color type " + std::to_string(color_type));
    }

    const std::size_t bpp = static_cast<std::size_t>(channels) * (bit_depth / 8);
    const std::size_t stride = bpp * width;
    const std::size_t raw_size = (stride + 1) * height;
    std::vector<std::uint8_t> raw = detail::zlib_inflate(idat, raw_size);

    // undo per-scanline filters in place
    std::vector<std::uint8_t> prev(stride, 0);
    std::vector<double> px;
    px.reserve(static_cast<std::size_t>(width) * height);
    for (std::uint32_t r = 0; r < height; ++r) {
        std::uint8_t* line = &raw[r * (stride + 1)];
        const int filter = line[0];
        std::uint8_t* cur = line + 1;
        for (std::size_t i = 0; i < stride; ++i) {
            const int a = i >= bpp ? cur[i - bpp] : 0;
            const int b = prev[i];
            const int c = i >= bpp ? prev[i - bpp] : 0;
            int v = cur[i];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += detail::paeth(a, b, c); break;
                default:
                    throw IoError("png: bad scanline filter " + std::to_string(filter));
            }
            cur[i] = static_cast<std::uint8_t>(v & 0xff);
        }
        std::copy(cur, cur + stride, prev.begin());

        auto sample = [&](std::uint32_t col, int ch) -> double {
            const std::size_t base = (static_cast<std::size_t>(col) * channels + ch) *
                                     (bit_depth / 8);
            return bit_depth == 16
                       ? static_cast<double>((cur[base] << 8) | cur[base + 1])
                       : static_cast<double>(cur[base]);
        };
        for (std::uint32_t col = 0; col < width; ++col) {
            if (channels >= 3)
                px.push_back(0.299 * sample(col, 0) + 0.587 * sample(col, 1) +
                             0.114 * sample(col, 2));
            else
                px.push_back(sample(col, 0));
        }
    }
    return Image(static_cast<int>(width), static_cast<int>(height), std::move(px));
}

inline Image load_png(const std::vector<std::uint8_t>& bytes) {
    return load_png(std::span<const std::uint8_t>(bytes));
}

}  // namespace mtfedge::raster
