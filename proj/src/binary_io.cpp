// Copyright 2026-present the registerdex project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "binary_io.hpp"

#include "registerdex/error.hpp"

namespace registerdex {

void BinaryWriter::put(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) {
        buffer_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

void BinaryWriter::str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buffer_.append(s);
}

void BinaryReader::need(size_t n) const {
    if (remaining() < n) {
        throw CorruptionError("index file truncated: need " + std::to_string(n) + " bytes at offset " +
                              std::to_string(pos_) + ", have " + std::to_string(remaining()));
    }
}

std::uint64_t BinaryReader::get(int width) {
    need(static_cast<size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<size_t>(width);
    return v;
}

std::string BinaryReader::str() {
    const std::uint32_t n = u32();
    need(n);
    std::string out(data_.substr(pos_, n));
    pos_ += n;
    return out;
}

void BinaryReader::expect_magic(std::string_view tag) {
    need(tag.size());
    if (data_.substr(pos_, tag.size()) != tag) {
        throw CorruptionError("bad index file magic, expected '" + std::string(tag) + "'");
    }
    pos_ += tag.size();
}

}  // namespace registerdex
