// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ssibl {

std::vector<uint8_t> read_file(const std::filesystem::path &path);

// Writes to a sibling temporary file and renames it into place, so a failed
// write never leaves a partial output behind.
void write_file_atomic(const std::filesystem::path &path, std::span<const uint8_t> bytes);
void write_file_atomic(const std::filesystem::path &path, std::string_view text);

class ByteWriter {
  public:
    void bytes(std::span<const uint8_t> data) { buffer_.insert(buffer_.end(), data.begin(), data.end()); }
    void text(std::string_view s) { buffer_.insert(buffer_.end(), s.begin(), s.end()); }
    void u8(uint8_t v) { buffer_.push_back(v); }
    void u32(uint32_t v);
    void f32(float v);

    const std::vector<uint8_t> &buffer() const { return buffer_; }

  private:
    std::vector<uint8_t> buffer_;
};

// Little-endian cursor over a byte buffer; running off the end raises
// ErrorCode::kTruncated.
class ByteReader {
  public:
    ByteReader(std::span<const uint8_t> data, std::string what) : data_(data), what_(std::move(what)) {}

    std::span<const uint8_t> bytes(size_t count);
    bool expect(std::string_view magic);
    uint32_t u32();
    float f32();

    size_t remaining() const { return data_.size() - pos_; }

  private:
    std::span<const uint8_t> data_;
    size_t pos_ = 0;
    std::string what_;
};

}  // namespace ssibl
