// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

#include "ssibl/envmap.h"

namespace ssibl {

struct CompareResult {
    Rgb scales{1.0};  // applied to b before the error is formed
    double mse = 0;
    double peak = 0;  // max channel of a over the compared pixels
    double psnr = 0;  // +infinity when the images agree exactly
    int64_t pixels = 0;
};

// PSNR = 10 log10(peak^2 / MSE) with peak the largest channel value of a.
// With channel_scale, b's channels are first multiplied by the least-squares
// factors s_c = sum(a_c b_c) / sum(b_c^2) (1 when b_c is all zero). A
// non-empty mask restricts the comparison to pixels where it is non-zero.
// Throws kDimensionMismatch for differing sizes.
CompareResult compare_images(const Image &a, const Image &b, bool channel_scale,
                             std::span<const uint8_t> mask = {});

}  // namespace ssibl
