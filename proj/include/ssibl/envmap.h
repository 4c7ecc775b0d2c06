// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ssibl/vecmath.h"

namespace ssibl {

using PixelRgb = Rgb;

// Row-major grid of linear RGB values with arbitrary dimensions. Rendered
// images and environment maps share this storage.
class Image {
  public:
    Image() = default;
    Image(int width, int height, Rgb fill = Rgb());

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return texels_.empty(); }

    const Rgb &at(int x, int y) const { return texels_[size_t(y) * width_ + x]; }
    Rgb &at(int x, int y) { return texels_[size_t(y) * width_ + x]; }

    std::span<const Rgb> texels() const { return texels_; }
    std::span<Rgb> texels() { return texels_; }

    friend bool operator==(const Image &, const Image &) = default;

  private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> texels_;
};

// Equirectangular environment map: width = 2 * height, every texel finite
// and non-negative. Immutable once constructed.
//
// Direction convention: y is up, v = acos(d.y) / pi runs from the north pole
// (v = 0) to the south pole (v = 1), u = fract(0.5 + atan2(d.x, -d.z) / 2pi),
// so the -z axis maps to the horizontal centre of the image.
class RadianceMap {
  public:
    // Throws ErrorCode::kInvalidArgument when the invariants do not hold.
    explicit RadianceMap(Image image);
    // Constant map of the given height.
    RadianceMap(int height, Rgb value);

    int width() const { return image_.width(); }
    int height() const { return image_.height(); }
    const Rgb &at(int x, int y) const { return image_.at(x, y); }
    const Image &image() const { return image_; }

    // Unit direction through the centre of texel (x, y).
    Vec3 texel_direction(int x, int y) const;

    friend bool operator==(const RadianceMap &, const RadianceMap &) = default;

  private:
    Image image_;
};

// Radiance RGBE shared-exponent codec (Ward). Decode uses channel =
// mantissa / 256 * 2^(e - 128); encode truncates, so encode(decode(b)) == b
// whenever b is a canonical encoding.
std::array<uint8_t, 4> encode_rgbe(const PixelRgb &p);
PixelRgb decode_rgbe(std::span<const uint8_t, 4> bytes);

// Radiance .hdr files with "-Y h +X w" orientation. The reader accepts flat
// and adaptive-RLE scanlines; the writer emits flat scanlines.
Image read_hdr_image(const std::filesystem::path &path);
void write_hdr_image(const Image &image, const std::filesystem::path &path);
std::vector<uint8_t> encode_hdr(const Image &image);
Image decode_hdr(std::span<const uint8_t> bytes);

RadianceMap load_hdr(const std::filesystem::path &path);
void save_hdr(const RadianceMap &map, const std::filesystem::path &path);

struct Uv {
    double u = 0, v = 0;
};

// At the exact poles u is arbitrary (atan2 of a zero vector).
Uv dir_to_uv(const Vec3 &d);
Vec3 uv_to_dir(double u, double v);

// Bilinear lookup in uv, wrapping horizontally and clamping vertically.
PixelRgb sample_bilinear(const RadianceMap &map, const Vec3 &d);
PixelRgb sample_nearest(const RadianceMap &map, const Vec3 &d);

// Solid angle of one texel in the given row: (2pi / width)(cos top - cos bottom).
double texel_solid_angle(const RadianceMap &map, int row);

// Standard piecewise sRGB transfer on [0, 1].
double linear_to_srgb(double x);
uint8_t srgb_byte(double linear, double exposure);

// 8-bit RGB PNG. Channels are scaled by exposure, clamped to [0,1] and passed
// through the sRGB transfer.
void save_png_srgb(const Image &image, const std::filesystem::path &path, double exposure);

}  // namespace ssibl
