// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace ssibl {

// PCG32 (O'Neill 2014) generator. A (seed, stream) pair fully determines the
// sequence, so parallel work can hand each pixel or texel its own stream and
// stay reproducible regardless of scheduling.
class RngStream {
  public:
    RngStream(uint64_t seed, uint64_t stream) { reseed(seed, stream); }

    void reseed(uint64_t seed, uint64_t stream) {
        state_ = 0u;
        inc_ = (stream << 1u) | 1u;
        next_u32();
        state_ += mix(seed);
        next_u32();
    }

    uint32_t next_u32() {
        uint64_t old = state_;
        state_ = old * 0x5851f42d4c957f2dULL + inc_;
        auto xorshifted = static_cast<uint32_t>(((old >> 18u) ^ old) >> 27u);
        auto rot = static_cast<uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((~rot + 1u) & 31));
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        uint64_t hi = next_u32() >> 5;  // 27 bits
        uint64_t lo = next_u32() >> 6;  // 26 bits
        return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
    }

    // Derive an independent child stream; used to fan out per-item streams.
    RngStream split(uint64_t child) const {
        return RngStream(mix(state_ ^ mix(child + 0x9e3779b97f4a7c15ULL)), inc_ ^ child);
    }

  private:
    static uint64_t mix(uint64_t v) {
        // splitmix64 finalizer
        v += 0x9e3779b97f4a7c15ULL;
        v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
        v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
        return v ^ (v >> 31);
    }

    uint64_t state_ = 0;
    uint64_t inc_ = 1;
};

}  // namespace ssibl
