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

#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

namespace registerdex {

// Little-endian encoding for index files. All multi-byte values are written
// byte by byte so the format does not depend on the host.
class BinaryWriter {
public:
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    void str(std::string_view s);
    void magic(std::string_view tag) { buffer_.append(tag); }

    const std::string& bytes() const { return buffer_; }

private:
    void put(std::uint64_t v, int width);

    std::string buffer_;
};

/// Throws CorruptionError on truncated input.
class BinaryReader {
public:
    explicit BinaryReader(std::string_view data) : data_(data) {}

    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }
    std::string str();
    void expect_magic(std::string_view tag);

    bool at_end() const { return pos_ == data_.size(); }
    size_t remaining() const { return data_.size() - pos_; }

private:
    std::uint64_t get(int width);
    void need(size_t n) const;

    std::string_view data_;
    size_t pos_ = 0;
};

}  // namespace registerdex
