// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/metrics.h"

#include <cmath>
#include <limits>

#include "ssibl/error.h"

namespace ssibl {

CompareResult compare_images(const Image &a, const Image &b, bool channel_scale, std::span<const uint8_t> mask) {
    if (a.width() != b.width() || a.height() != b.height())
        fail(ErrorCode::kDimensionMismatch, "images differ in size: " + std::to_string(a.width()) + "x" +
                                                std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                                                "x" + std::to_string(b.height()));
    const auto &ta = a.texels();
    const auto &tb = b.texels();
    if (!mask.empty() && mask.size() != ta.size())
        fail(ErrorCode::kDimensionMismatch, "mask size differs from image size");
    auto used = [&](size_t i) { return mask.empty() || mask[i] != 0; };

    CompareResult r;
    if (channel_scale) {
        Rgb ab, bb;
        for (size_t i = 0; i < ta.size(); ++i) {
            if (!used(i))
                continue;
            ab += ta[i] * tb[i];
            bb += tb[i] * tb[i];
        }
        for (int c = 0; c < 3; ++c)
            r.scales[c] = bb[c] > 0 ? ab[c] / bb[c] : 1.0;
    }

    double sum = 0;
    for (size_t i = 0; i < ta.size(); ++i) {
        if (!used(i))
            continue;
        sum += squared_norm(ta[i] - tb[i] * r.scales);
        r.peak = std::max(r.peak, ta[i].max_component());
        ++r.pixels;
    }
    require(r.pixels > 0, "no pixels to compare");
    r.mse = sum / (3.0 * double(r.pixels));
    r.psnr = r.mse == 0 ? std::numeric_limits<double>::infinity() : 10 * std::log10(r.peak * r.peak / r.mse);
    return r;
}

}  // namespace ssibl
