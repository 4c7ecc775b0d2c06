// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/binary_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ssibl/error.h"

namespace ssibl {

namespace fs = std::filesystem;

std::vector<uint8_t> read_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::kIo, "cannot open " + path.string());
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        fail(ErrorCode::kIo, "read failed for " + path.string());
    return data;
}

void write_file_atomic(const fs::path &path, std::span<const uint8_t> bytes) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            fail(ErrorCode::kIo, "cannot open " + tmp.string() + " for writing");
        out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ignored;
            fs::remove(tmp, ignored);
            fail(ErrorCode::kIo, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail(ErrorCode::kIo, "cannot move output into place at " + path.string());
    }
}

void write_file_atomic(const fs::path &path, std::string_view text) {
    write_file_atomic(path, std::span(reinterpret_cast<const uint8_t *>(text.data()), text.size()));
}

void ByteWriter::u32(uint32_t v) {
    for (int i = 0; i < 4; ++i)
        buffer_.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void ByteWriter::f32(float v) { u32(std::bit_cast<uint32_t>(v)); }

std::span<const uint8_t> ByteReader::bytes(size_t count) {
    if (count > remaining())
        fail(ErrorCode::kTruncated, what_ + ": unexpected end of data");
    auto out = data_.subspan(pos_, count);
    pos_ += count;
    return out;
}

bool ByteReader::expect(std::string_view magic) {
    if (remaining() < magic.size())
        return false;
    if (std::memcmp(data_.data() + pos_, magic.data(), magic.size()) != 0)
        return false;
    pos_ += magic.size();
    return true;
}

uint32_t ByteReader::u32() {
    auto b = bytes(4);
    return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) | (uint32_t(b[3]) << 24);
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

}  // namespace ssibl
