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

#include "registerdex/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <clocale>
#include <cwctype>
#include <locale.h>
#include <wctype.h>

namespace registerdex {

namespace {

// glibc's C.UTF-8 classification tables give Unicode-aware alnum/lowercase
// without pulling in ICU. Without the locale, non-ASCII code points count as
// word characters and are left as-is.
class UnicodeClassifier {
public:
    UnicodeClassifier() {
        locale_ = newlocale(LC_CTYPE_MASK, "C.UTF-8", static_cast<locale_t>(nullptr));
        if (locale_ == static_cast<locale_t>(nullptr)) {
            locale_ = newlocale(LC_CTYPE_MASK, "C.utf8", static_cast<locale_t>(nullptr));
        }
    }
    ~UnicodeClassifier() {
        if (locale_ != static_cast<locale_t>(nullptr)) {
            freelocale(locale_);
        }
    }
    UnicodeClassifier(const UnicodeClassifier&) = delete;
    UnicodeClassifier& operator=(const UnicodeClassifier&) = delete;

    bool is_alnum(char32_t cp) const {
        if (cp < 0x80) {
            return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
        }
        if (locale_ == static_cast<locale_t>(nullptr)) {
            return true;
        }
        return iswalnum_l(static_cast<wint_t>(cp), locale_) != 0;
    }

    char32_t to_lower(char32_t cp) const {
        if (cp < 0x80) {
            return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
        }
        if (locale_ == static_cast<locale_t>(nullptr)) {
            return cp;
        }
        return static_cast<char32_t>(towlower_l(static_cast<wint_t>(cp), locale_));
    }

private:
    locale_t locale_ = static_cast<locale_t>(nullptr);
};

const UnicodeClassifier& classifier() {
    static const UnicodeClassifier instance;
    return instance;
}

// Decodes one code point starting at text[pos]; returns the number of bytes
// consumed, or 0 for a malformed sequence (caller skips one byte).
size_t decode_utf8(std::string_view text, size_t pos, char32_t& cp) {
    const auto byte = [&](size_t i) { return static_cast<unsigned char>(text[i]); };
    const unsigned char lead = byte(pos);
    size_t length = 0;
    if (lead < 0x80) {
        cp = lead;
        return 1;
    } else if ((lead & 0xE0) == 0xC0) {
        cp = lead & 0x1F;
        length = 2;
    } else if ((lead & 0xF0) == 0xE0) {
        cp = lead & 0x0F;
        length = 3;
    } else if ((lead & 0xF8) == 0xF0) {
        cp = lead & 0x07;
        length = 4;
    } else {
        return 0;
    }
    if (pos + length > text.size()) {
        return 0;
    }
    for (size_t i = 1; i < length; ++i) {
        const unsigned char next = byte(pos + i);
        if ((next & 0xC0) != 0x80) {
            return 0;
        }
        cp = (cp << 6) | (next & 0x3F);
    }
    return length;
}

void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

constexpr std::array<std::string_view, 64> kStopwords = {
    "a",    "about", "above", "after", "all",   "also",  "an",    "and",   "any",  "are",   "as",
    "at",   "be",    "been",  "being", "both",  "but",   "by",    "can",   "do",   "does",  "each",
    "for",  "from",  "had",   "has",   "have",  "how",   "if",    "in",    "into", "is",    "it",
    "its",  "more",  "most",  "no",    "not",   "of",    "on",    "or",    "other", "our",  "over",
    "same", "so",    "such",  "than",  "that",  "the",   "their", "them",  "then", "there", "these",
    "they", "this",  "to",    "was",   "we",    "were",  "what",  "which", "with",
};

}  // namespace

bool is_stopword(std::string_view token) {
    return std::binary_search(kStopwords.begin(), kStopwords.end(), token);
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options) {
    const auto& cls = classifier();
    std::vector<std::string> tokens;
    std::string current;
    const auto flush = [&] {
        if (!current.empty()) {
            if (!options.remove_stopwords || !is_stopword(current)) {
                tokens.push_back(std::move(current));
            }
            current.clear();
        }
    };
    size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp = 0;
        const size_t used = decode_utf8(text, pos, cp);
        if (used == 0) {
            flush();
            ++pos;
            continue;
        }
        pos += used;
        if (cls.is_alnum(cp)) {
            encode_utf8(cls.to_lower(cp), current);
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::string_view utf8_truncate(std::string_view text, size_t max_bytes) {
    if (text.size() <= max_bytes) {
        return text;
    }
    size_t cut = max_bytes;
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) {
        --cut;
    }
    return text.substr(0, cut);
}

std::string_view trim(std::string_view text) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    size_t begin = 0;
    size_t end = text.size();
    while (begin < end && is_space(text[begin])) {
        ++begin;
    }
    while (end > begin && is_space(text[end - 1])) {
        --end;
    }
    return text.substr(begin, end - begin);
}

std::vector<std::string> split_paragraphs(std::string_view text) {
    std::vector<std::string> paragraphs;
    std::string current;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        const std::string_view line = text.substr(pos, eol - pos);
        if (trim(line).empty()) {
            if (auto part = trim(current); !part.empty()) {
                paragraphs.emplace_back(part);
            }
            current.clear();
        } else {
            if (!current.empty()) {
                current.push_back('\n');
            }
            current.append(line);
        }
        pos = eol + 1;
    }
    if (auto part = trim(current); !part.empty()) {
        paragraphs.emplace_back(part);
    }
    return paragraphs;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> sentences;
    size_t start = 0;
    const auto emit = [&](size_t end) {
        if (auto part = trim(text.substr(start, end - start)); !part.empty()) {
            sentences.emplace_back(part);
        }
        start = end;
    };
    for (size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n') {
            emit(i + 1);
        } else if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || text[i + 1] == ' ')) {
            emit(i + 1);
        }
    }
    emit(text.size());
    return sentences;
}

std::string join(const std::vector<std::string>& parts, std::string_view separator) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            out.append(separator);
        }
        out.append(parts[i]);
    }
    return out;
}

std::string split_camel_case(std::string_view name) {
    std::string out;
    for (size_t i = 0; i < name.size(); ++i) {
        const auto c = static_cast<unsigned char>(name[i]);
        if (i > 0 && std::isupper(c) && std::islower(static_cast<unsigned char>(name[i - 1]))) {
            out.push_back(' ');
        }
        out.push_back(name[i]);
    }
    return out;
}

}  // namespace registerdex
