// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/error.h"

namespace ssibl {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kMalformedHeader: return "malformed-header";
    case ErrorCode::kUnsupportedOrientation: return "unsupported-orientation";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kEmptyMesh: return "empty-mesh";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kDegenerateEstimator: return "degenerate-estimator";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kDivergence: return "divergence";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string &message) { throw Error(code, message); }

}  // namespace ssibl
