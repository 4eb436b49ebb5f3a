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

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace registerdex {

class BinaryWriter;
class BinaryReader;

/// Okapi BM25 parameters. Defaults follow rank-bm25.
struct Bm25Params {
    double k1 = 1.5;
    double b = 0.75;

    bool operator==(const Bm25Params&) const = default;
};

/// In-memory inverted index with Okapi BM25 scoring.
///
///   idf(t)      = ln(1 + (N - df + 0.5) / (df + 0.5))
///   score(d, q) = sum over query tokens t of
///                 idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl))
///
/// Repeated query tokens contribute once per occurrence. The idf form is
/// strictly positive, so every score is >= 0.
class LexicalIndex {
public:
    struct Posting {
        std::uint32_t doc;
        std::uint32_t tf;

        bool operator==(const Posting&) const = default;
    };

    LexicalIndex() = default;

    /// `docs[i]` is the token sequence of document `ids[i]`.
    static LexicalIndex build(std::vector<std::string> ids, const std::vector<std::vector<std::string>>& docs,
                              Bm25Params params = {});

    size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    const Bm25Params& params() const { return params_; }

    double average_length() const { return avgdl_; }
    std::uint32_t doc_length(size_t doc) const { return lengths_.at(doc); }
    std::uint32_t doc_frequency(std::string_view term) const;
    double idf(std::uint32_t df) const;

    /// One score per document, aligned with ids().
    std::vector<double> score(std::span<const std::string> query_tokens) const;

    void write(BinaryWriter& out) const;
    /// Throws CorruptionError when stored statistics disagree with the postings.
    static LexicalIndex read(BinaryReader& in);

private:
    std::vector<std::string> ids_;
    std::vector<std::uint32_t> lengths_;
    double avgdl_ = 0.0;
    std::map<std::string, std::vector<Posting>, std::less<>> postings_;
    Bm25Params params_;
};

/// Exact (full-scan) cosine index over fixed-dimension vectors.
class DenseIndex {
public:
    DenseIndex() = default;

    /// Throws IndexError if the vectors do not share one dimension.
    static DenseIndex build(std::vector<std::string> ids, const std::vector<std::vector<double>>& vectors);

    size_t size() const { return ids_.size(); }
    size_t dimension() const { return dimension_; }
    const std::vector<std::string>& ids() const { return ids_; }
    std::span<const double> vector(size_t doc) const;

    /// Cosine per document; throws IndexError on dimension mismatch.
    std::vector<double> score(std::span<const double> query) const;

    void write(BinaryWriter& out) const;
    static DenseIndex read(BinaryReader& in);

private:
    std::vector<std::string> ids_;
    size_t dimension_ = 0;
    std::vector<double> values_;
};

}  // namespace registerdex
