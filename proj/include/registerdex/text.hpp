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

#include <string>
#include <string_view>
#include <vector>

namespace registerdex {

struct TokenizerOptions {
    bool remove_stopwords = false;

    bool operator==(const TokenizerOptions&) const = default;
};

/// Lowercases and splits on any code point that is not a letter or digit.
/// Input is UTF-8; malformed bytes act as separators.
std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options = {});

bool is_stopword(std::string_view token);

/// Longest prefix of `text` of at most `max_bytes` bytes that does not split a
/// UTF-8 sequence.
std::string_view utf8_truncate(std::string_view text, size_t max_bytes);

std::string_view trim(std::string_view text);

/// Splits on blank lines (a line containing only whitespace). Parts are
/// trimmed and empty parts dropped.
std::vector<std::string> split_paragraphs(std::string_view text);

/// Rough sentence split on '.', '!', '?' followed by whitespace, and on newlines.
std::vector<std::string> split_sentences(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view separator);

/// "MainResult" -> "Main Result", so camel-cased node names tokenize into words.
std::string split_camel_case(std::string_view name);

}  // namespace registerdex
