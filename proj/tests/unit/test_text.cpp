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

#include <doctest.h>

#include <algorithm>

#include "registerdex/hashing.hpp"
#include "registerdex/text.hpp"

using namespace registerdex;

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
    CHECK(tokenize("Hello, World! x2") == std::vector<std::string>{"hello", "world", "x2"});
    CHECK(tokenize("") .empty());
    CHECK(tokenize("  --  ").empty());
    CHECK(tokenize("the cat", {.remove_stopwords = true}) == std::vector<std::string>{"cat"});
    // Non-ASCII letters stay inside tokens.
    CHECK(tokenize("Café déjà-vu") == std::vector<std::string>{"café", "déjà", "vu"});
}

TEST_CASE("utf8 truncation never splits a code point") {
    const std::string text = "ab\xc3\xa9";  // "abé"
    CHECK(utf8_truncate(text, 3) == "ab");
    CHECK(utf8_truncate(text, 4) == text);
    CHECK(utf8_truncate(text, 0).empty());
}

TEST_CASE("paragraph and sentence splitting") {
    CHECK(split_paragraphs("one\n\n  \ntwo\nstill two\n\n") == std::vector<std::string>{"one", "two\nstill two"});
    CHECK(split_sentences("A b. C d? E") == std::vector<std::string>{"A b.", "C d?", "E"});
}

TEST_CASE("camel case names split into words") {
    CHECK(split_camel_case("MainResult") == "Main Result");
    CHECK(split_camel_case("Abstract") == "Abstract");
    CHECK(split_camel_case("") == "");
}

TEST_CASE("stopword list is usable for lookups") {
    CHECK(is_stopword("the"));
    CHECK(is_stopword("and"));
    CHECK_FALSE(is_stopword("transformer"));
}

TEST_CASE("hashing primitives match published vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    std::uint64_t state = 0;
    CHECK(splitmix64(state) == 0xe220a8397b1dcdafULL);
}
