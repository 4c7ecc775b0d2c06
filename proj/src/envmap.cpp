// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/envmap.h"

#include <png.h>

#include <charconv>
#include <csetjmp>
#include <cstring>
#include <sstream>
#include <string>

#include "ssibl/binary_io.h"
#include "ssibl/error.h"

namespace ssibl {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
    require(width >= 1 && height >= 1, "image dimensions must be positive");
    texels_.assign(size_t(width) * height, fill);
}

RadianceMap::RadianceMap(Image image) : image_(std::move(image)) {
    require(image_.width() >= 2 && image_.width() == 2 * image_.height(),
            "environment map must be 2:1 with width >= 2, got " + std::to_string(image_.width()) + "x" +
                std::to_string(image_.height()));
    for (const Rgb &t : image_.texels())
        require(is_finite(t) && t.min_component() >= 0, "environment texels must be finite and non-negative");
}

RadianceMap::RadianceMap(int height, Rgb value) : RadianceMap(Image(2 * height, height, value)) {}

Vec3 RadianceMap::texel_direction(int x, int y) const {
    return uv_to_dir((x + 0.5) / width(), (y + 0.5) / height());
}

// ---------------------------------------------------------------------------
// RGBE codec

std::array<uint8_t, 4> encode_rgbe(const PixelRgb &p) {
    double v = p.max_component();
    if (!(v > 0))
        return {0, 0, 0, 0};
    int e = 0;
    std::frexp(v, &e);
    if (e + 128 < 1)
        return {0, 0, 0, 0};
    if (e + 128 > 255) {
        // Saturate out-of-range values to the largest representable one.
        return {255, 255, 255, 255};
    }
    // Scaling by a power of two is exact, so truncation sees the true mantissa.
    auto quantize = [e](double c) -> uint8_t {
        double q = std::ldexp(std::max(0.0, c), 8 - e);
        return static_cast<uint8_t>(std::min(255.0, q));
    };
    return {quantize(p.r), quantize(p.g), quantize(p.b), static_cast<uint8_t>(e + 128)};
}

PixelRgb decode_rgbe(std::span<const uint8_t, 4> bytes) {
    if (bytes[3] == 0)
        return {};
    double f = std::ldexp(1.0, int(bytes[3]) - (128 + 8));
    return {bytes[0] * f, bytes[1] * f, bytes[2] * f};
}

// ---------------------------------------------------------------------------
// Radiance .hdr files

namespace {

struct HdrHeader {
    int width = 0;
    int height = 0;
    size_t payload_offset = 0;
};

std::string read_line(std::span<const uint8_t> bytes, size_t &pos) {
    std::string line;
    while (pos < bytes.size() && bytes[pos] != '\n')
        line.push_back(static_cast<char>(bytes[pos++]));
    if (pos >= bytes.size())
        fail(ErrorCode::kMalformedHeader, "header ended before the resolution line");
    ++pos;
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    return line;
}

bool parse_int(const std::string &s, int &out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

HdrHeader parse_header(std::span<const uint8_t> bytes) {
    size_t pos = 0;
    if (bytes.size() < 2 || bytes[0] != '#' || bytes[1] != '?')
        fail(ErrorCode::kMalformedHeader, "missing #? signature");
    read_line(bytes, pos);
    for (;;) {
        std::string line = read_line(bytes, pos);
        if (line.empty())
            break;
        if (line.rfind("FORMAT=", 0) == 0 && line != "FORMAT=32-bit_rle_rgbe")
            fail(ErrorCode::kMalformedHeader, "unsupported pixel format '" + line.substr(7) + "'");
    }

    std::string res = read_line(bytes, pos);
    std::istringstream tokens(res);
    std::string axis0, axis1, n0, n1, extra;
    tokens >> axis0 >> n0 >> axis1 >> n1;
    int a = 0, b = 0;
    auto is_axis = [](const std::string &s) {
        return s.size() == 2 && (s[0] == '+' || s[0] == '-') && (s[1] == 'X' || s[1] == 'Y');
    };
    if (!is_axis(axis0) || !is_axis(axis1) || !parse_int(n0, a) || !parse_int(n1, b) || (tokens >> extra) ||
        axis0[1] == axis1[1])
        fail(ErrorCode::kMalformedHeader, "unparseable resolution line '" + res + "'");
    if (axis0 != "-Y" || axis1 != "+X")
        fail(ErrorCode::kUnsupportedOrientation, "orientation '" + res + "' is not '-Y h +X w'");
    if (a < 1 || b < 1)
        fail(ErrorCode::kMalformedHeader, "non-positive image size in '" + res + "'");
    return {b, a, pos};
}

void decode_scanline(ByteReader &in, int width, std::vector<uint8_t> &scan) {
    scan.assign(size_t(width) * 4, 0);
    bool rle = false;
    if (width >= 8 && width < 0x8000 && in.remaining() >= 4) {
        auto head = in.bytes(4);
        if (head[0] == 2 && head[1] == 2 && (head[2] & 0x80) == 0) {
            if (((int(head[2]) << 8) | head[3]) != width)
                fail(ErrorCode::kParse, "RLE scanline width does not match header");
            rle = true;
        } else {
            std::memcpy(scan.data(), head.data(), 4);
        }
        if (!rle) {
            auto rest = in.bytes(size_t(width - 1) * 4);
            std::memcpy(scan.data() + 4, rest.data(), rest.size());
            return;
        }
    } else {
        auto flat = in.bytes(size_t(width) * 4);
        std::memcpy(scan.data(), flat.data(), flat.size());
        return;
    }

    // Adaptive RLE: each component stored separately as runs/literals.
    for (int c = 0; c < 4; ++c) {
        int x = 0;
        while (x < width) {
            int count = in.bytes(1)[0];
            if (count > 128) {
                count -= 128;
                if (x + count > width)
                    fail(ErrorCode::kParse, "RLE run overflows scanline");
                uint8_t value = in.bytes(1)[0];
                for (int i = 0; i < count; ++i)
                    scan[size_t(x++) * 4 + c] = value;
            } else {
                if (count == 0 || x + count > width)
                    fail(ErrorCode::kParse, "bad RLE literal count");
                auto lit = in.bytes(count);
                for (int i = 0; i < count; ++i)
                    scan[size_t(x++) * 4 + c] = lit[i];
            }
        }
    }
}

}  // namespace

Image decode_hdr(std::span<const uint8_t> bytes) {
    HdrHeader header = parse_header(bytes);
    Image image(header.width, header.height);
    ByteReader in(bytes.subspan(header.payload_offset), "hdr scanline");
    std::vector<uint8_t> scan;
    for (int y = 0; y < header.height; ++y) {
        decode_scanline(in, header.width, scan);
        for (int x = 0; x < header.width; ++x)
            image.at(x, y) = decode_rgbe(std::span<const uint8_t, 4>(scan.data() + size_t(x) * 4, 4));
    }
    return image;
}

std::vector<uint8_t> encode_hdr(const Image &image) {
    ByteWriter out;
    out.text("#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n");
    out.text("-Y " + std::to_string(image.height()) + " +X " + std::to_string(image.width()) + "\n");
    for (const Rgb &t : image.texels())
        out.bytes(encode_rgbe(t));
    return out.buffer();
}

Image read_hdr_image(const std::filesystem::path &path) { return decode_hdr(read_file(path)); }

void write_hdr_image(const Image &image, const std::filesystem::path &path) {
    write_file_atomic(path, encode_hdr(image));
}

RadianceMap load_hdr(const std::filesystem::path &path) { return RadianceMap(read_hdr_image(path)); }

void save_hdr(const RadianceMap &map, const std::filesystem::path &path) { write_hdr_image(map.image(), path); }

// ---------------------------------------------------------------------------
// Direction mapping and lookup

Uv dir_to_uv(const Vec3 &d) {
    double v = std::acos(std::clamp(d.y, -1.0, 1.0)) * kInvPi;
    double u = 0.5 + std::atan2(d.x, -d.z) / (2 * kPi);
    u -= std::floor(u);
    if (u >= 1.0)
        u = 0.0;
    return {u, v};
}

Vec3 uv_to_dir(double u, double v) {
    double theta = v * kPi;
    double phi = (u - 0.5) * 2 * kPi;
    double s = std::sin(theta);
    return {s * std::sin(phi), std::cos(theta), -s * std::cos(phi)};
}

PixelRgb sample_bilinear(const RadianceMap &map, const Vec3 &d) {
    Uv uv = dir_to_uv(d);
    const int w = map.width(), h = map.height();
    double px = uv.u * w - 0.5;
    double py = uv.v * h - 0.5;
    double fx = std::floor(px), fy = std::floor(py);
    double tx = px - fx, ty = py - fy;
    int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
    auto wrap = [w](int x) { return ((x % w) + w) % w; };
    auto clampy = [h](int y) { return std::clamp(y, 0, h - 1); };
    int xa = wrap(x0), xb = wrap(x0 + 1);
    int ya = clampy(y0), yb = clampy(y0 + 1);
    Rgb top = map.at(xa, ya) * (1 - tx) + map.at(xb, ya) * tx;
    Rgb bottom = map.at(xa, yb) * (1 - tx) + map.at(xb, yb) * tx;
    return top * (1 - ty) + bottom * ty;
}

PixelRgb sample_nearest(const RadianceMap &map, const Vec3 &d) {
    Uv uv = dir_to_uv(d);
    int x = std::min(map.width() - 1, static_cast<int>(uv.u * map.width()));
    int y = std::min(map.height() - 1, static_cast<int>(uv.v * map.height()));
    return map.at(x, y);
}

double texel_solid_angle(const RadianceMap &map, int row) {
    require(row >= 0 && row < map.height(), "row out of range");
    double top = std::cos(kPi * row / map.height());
    double bottom = std::cos(kPi * (row + 1) / map.height());
    return 2 * kPi / map.width() * (top - bottom);
}

// ---------------------------------------------------------------------------
// PNG output

double linear_to_srgb(double x) {
    x = std::clamp(x, 0.0, 1.0);
    if (x <= 0.0031308)
        return 12.92 * x;
    return 1.055 * std::pow(x, 1.0 / 2.4) - 0.055;
}

uint8_t srgb_byte(double linear, double exposure) {
    double s = linear_to_srgb(linear * exposure);
    return static_cast<uint8_t>(std::clamp(std::floor(s * 255.0 + 0.5), 0.0, 255.0));
}

namespace {

void png_append(png_structp png, png_bytep data, png_size_t length) {
    auto *out = static_cast<std::vector<uint8_t> *>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void png_no_flush(png_structp) {}

}  // namespace

void save_png_srgb(const Image &image, const std::filesystem::path &path, double exposure) {
    require(exposure > 0 && std::isfinite(exposure), "exposure must be positive");
    require(!image.empty(), "cannot write an empty image");

    std::vector<uint8_t> rows(size_t(image.width()) * image.height() * 3);
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) {
            const Rgb &c = image.at(x, y);
            uint8_t *p = &rows[(size_t(y) * image.width() + x) * 3];
            p[0] = srgb_byte(c.r, exposure);
            p[1] = srgb_byte(c.g, exposure);
            p[2] = srgb_byte(c.b, exposure);
        }

    std::vector<uint8_t> encoded;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png)
        fail(ErrorCode::kIo, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorCode::kIo, "PNG encoding failed for " + path.string());
    }
    png_set_write_fn(png, &encoded, png_append, png_no_flush);
    png_set_IHDR(png, info, image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_sRGB(png, info, PNG_sRGB_INTENT_PERCEPTUAL);
    png_write_info(png, info);
    for (int y = 0; y < image.height(); ++y)
        png_write_row(png, &rows[size_t(y) * image.width() * 3]);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);

    write_file_atomic(path, encoded);
}

}  // namespace ssibl
