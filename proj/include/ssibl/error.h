// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ssibl {

enum class ErrorCode {
    kIo,
    kMalformedHeader,
    kUnsupportedOrientation,
    kTruncated,
    kParse,
    kEmptyMesh,
    kInvalidArgument,
    kDimensionMismatch,
    kDegenerateEstimator,
    kNonFinite,
    kDivergence,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library. The code lets callers (and the CLI
// exit-status mapping) distinguish failure classes without string matching.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &message);

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string &message);

inline void require(bool condition, const std::string &message) {
    if (!condition)
        fail(ErrorCode::kInvalidArgument, message);
}

}  // namespace ssibl
