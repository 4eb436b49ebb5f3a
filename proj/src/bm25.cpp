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

#include "registerdex/bm25.hpp"

#include <cmath>
#include <unordered_map>

#include "binary_io.hpp"
#include "registerdex/content_model.hpp"
#include "registerdex/error.hpp"

namespace registerdex {

LexicalIndex LexicalIndex::build(std::vector<std::string> ids, const std::vector<std::vector<std::string>>& docs,
                                 Bm25Params params) {
    if (ids.size() != docs.size()) {
        throw IndexError("lexical index: " + std::to_string(ids.size()) + " ids for " + std::to_string(docs.size()) +
                         " documents");
    }
    if (ids.size() > UINT32_MAX) {
        throw IndexError("lexical index: too many documents");
    }
    LexicalIndex index;
    index.ids_ = std::move(ids);
    index.params_ = params;
    index.lengths_.reserve(docs.size());
    std::uint64_t total = 0;
    for (size_t d = 0; d < docs.size(); ++d) {
        std::unordered_map<std::string_view, std::uint32_t> tf;
        for (const auto& token : docs[d]) {
            ++tf[token];
        }
        for (const auto& [term, count] : tf) {
            index.postings_[std::string(term)].push_back({static_cast<std::uint32_t>(d), count});
        }
        index.lengths_.push_back(static_cast<std::uint32_t>(docs[d].size()));
        total += docs[d].size();
    }
    index.avgdl_ = docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs.size());
    return index;
}

std::uint32_t LexicalIndex::doc_frequency(std::string_view term) const {
    const auto it = postings_.find(term);
    return it == postings_.end() ? 0 : static_cast<std::uint32_t>(it->second.size());
}

double LexicalIndex::idf(std::uint32_t df) const {
    const double n = static_cast<double>(ids_.size());
    const double f = static_cast<double>(df);
    return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

std::vector<double> LexicalIndex::score(std::span<const std::string> query_tokens) const {
    std::vector<double> scores(ids_.size(), 0.0);
    if (ids_.empty() || avgdl_ <= 0.0) {
        return scores;
    }
    const double k1 = params_.k1;
    const double b = params_.b;
    for (const auto& token : query_tokens) {
        const auto it = postings_.find(token);
        if (it == postings_.end()) {
            continue;
        }
        const double w = idf(static_cast<std::uint32_t>(it->second.size()));
        for (const auto& [doc, tf] : it->second) {
            const double f = static_cast<double>(tf);
            const double norm = k1 * (1.0 - b + b * static_cast<double>(lengths_[doc]) / avgdl_);
            scores[doc] += w * f * (k1 + 1.0) / (f + norm);
        }
    }
    return scores;
}

void LexicalIndex::write(BinaryWriter& out) const {
    out.magic("RDXL");
    out.f64(params_.k1);
    out.f64(params_.b);
    out.u32(static_cast<std::uint32_t>(ids_.size()));
    for (size_t d = 0; d < ids_.size(); ++d) {
        out.str(ids_[d]);
        out.u32(lengths_[d]);
    }
    out.f64(avgdl_);
    out.u64(postings_.size());
    for (const auto& [term, list] : postings_) {
        out.str(term);
        out.u32(static_cast<std::uint32_t>(list.size()));
        for (const auto& [doc, tf] : list) {
            out.u32(doc);
            out.u32(tf);
        }
    }
}

LexicalIndex LexicalIndex::read(BinaryReader& in) {
    in.expect_magic("RDXL");
    LexicalIndex index;
    index.params_.k1 = in.f64();
    index.params_.b = in.f64();
    const std::uint32_t n = in.u32();
    index.ids_.reserve(n);
    index.lengths_.reserve(n);
    std::uint64_t total = 0;
    for (std::uint32_t d = 0; d < n; ++d) {
        index.ids_.push_back(in.str());
        index.lengths_.push_back(in.u32());
        total += index.lengths_.back();
    }
    index.avgdl_ = in.f64();
    const double expected_avgdl = n == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(n);
    if (index.avgdl_ != expected_avgdl) {
        throw CorruptionError("lexical index: stored average length disagrees with document lengths");
    }
    std::vector<std::uint64_t> tf_sums(n, 0);
    const std::uint64_t terms = in.u64();
    for (std::uint64_t t = 0; t < terms; ++t) {
        std::string term = in.str();
        const std::uint32_t df = in.u32();
        if (df == 0 || df > n) {
            throw CorruptionError("lexical index: term '" + term + "' has document frequency " + std::to_string(df));
        }
        std::vector<Posting> list;
        list.reserve(df);
        for (std::uint32_t p = 0; p < df; ++p) {
            const std::uint32_t doc = in.u32();
            const std::uint32_t tf = in.u32();
            if (doc >= n || tf == 0) {
                throw CorruptionError("lexical index: bad posting for term '" + term + "'");
            }
            tf_sums[doc] += tf;
            list.push_back({doc, tf});
        }
        index.postings_.emplace(std::move(term), std::move(list));
    }
    for (std::uint32_t d = 0; d < n; ++d) {
        if (tf_sums[d] != index.lengths_[d]) {
            throw CorruptionError("lexical index: postings of '" + index.ids_[d] + "' do not add up to its length");
        }
    }
    return index;
}

DenseIndex DenseIndex::build(std::vector<std::string> ids, const std::vector<std::vector<double>>& vectors) {
    if (ids.size() != vectors.size()) {
        throw IndexError("dense index: " + std::to_string(ids.size()) + " ids for " + std::to_string(vectors.size()) +
                         " vectors");
    }
    DenseIndex index;
    index.ids_ = std::move(ids);
    if (!vectors.empty()) {
        index.dimension_ = vectors.front().size();
    }
    index.values_.reserve(index.dimension_ * vectors.size());
    for (size_t d = 0; d < vectors.size(); ++d) {
        if (vectors[d].size() != index.dimension_) {
            throw IndexError("dense index: vector of '" + index.ids_[d] + "' has dimension " +
                             std::to_string(vectors[d].size()) + ", expected " + std::to_string(index.dimension_));
        }
        index.values_.insert(index.values_.end(), vectors[d].begin(), vectors[d].end());
    }
    return index;
}

std::span<const double> DenseIndex::vector(size_t doc) const {
    if (doc >= ids_.size()) {
        throw std::out_of_range("dense index: no document " + std::to_string(doc));
    }
    return std::span<const double>(values_).subspan(doc * dimension_, dimension_);
}

std::vector<double> DenseIndex::score(std::span<const double> query) const {
    std::vector<double> scores(ids_.size(), 0.0);
    if (ids_.empty()) {
        return scores;
    }
    if (query.size() != dimension_) {
        throw IndexError("dense index: query dimension " + std::to_string(query.size()) + " does not match " +
                         std::to_string(dimension_));
    }
    for (size_t d = 0; d < ids_.size(); ++d) {
        scores[d] = cosine(vector(d), query);
    }
    return scores;
}

void DenseIndex::write(BinaryWriter& out) const {
    out.magic("RDXD");
    out.u32(static_cast<std::uint32_t>(ids_.size()));
    out.u32(static_cast<std::uint32_t>(dimension_));
    for (const auto& id : ids_) {
        out.str(id);
    }
    for (double v : values_) {
        out.f64(v);
    }
}

DenseIndex DenseIndex::read(BinaryReader& in) {
    in.expect_magic("RDXD");
    DenseIndex index;
    const std::uint32_t n = in.u32();
    index.dimension_ = in.u32();
    if (n > 0 && index.dimension_ == 0) {
        throw CorruptionError("dense index: zero dimension");
    }
    for (std::uint32_t d = 0; d < n; ++d) {
        index.ids_.push_back(in.str());
    }
    if (in.remaining() < static_cast<size_t>(n) * index.dimension_ * 8) {
        throw CorruptionError("dense index: vector block truncated");
    }
    index.values_.resize(static_cast<size_t>(n) * index.dimension_);
    for (auto& v : index.values_) {
        v = in.f64();
        if (!std::isfinite(v)) {
            throw CorruptionError("dense index: non-finite vector entry");
        }
    }
    return index;
}

}  // namespace registerdex
