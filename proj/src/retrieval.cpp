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

#include "registerdex/retrieval.hpp"

#include <algorithm>
#include <set>

#include "registerdex/error.hpp"

namespace registerdex {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

namespace {

std::chrono::microseconds since(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start);
}

}  // namespace

ordered_json to_json(const SearchResult& result) {
    ordered_json out;
    out["query"] = result.query;
    out["manual"] = result.manual_views;
    ordered_json views = ordered_json::array();
    for (size_t i = 0; i < result.views_used.views.size(); ++i) {
        const View& view = result.views_used.views[i];
        ordered_json entry;
        entry["path"] = view.path.str();
        entry["schema_type"] = std::string(to_string(view.schema_type));
        if (i < result.views_used.scores.size()) {
            entry["score"] = result.views_used.scores[i];
        }
        views.push_back(std::move(entry));
    }
    out["views"] = std::move(views);
    ordered_json results = ordered_json::array();
    for (const auto& doc : result.ranked) {
        ordered_json entry;
        entry["paper_id"] = doc.paper_id;
        entry["score"] = doc.score;
        entry["best_view"] = doc.best_view ? ordered_json(doc.best_view->path.str()) : ordered_json(nullptr);
        results.push_back(std::move(entry));
    }
    out["results"] = std::move(results);
    return out;
}

std::vector<ResolvedIndex> lookup(const IndexTree& tree, std::span<const View> views,
                                  std::vector<std::string>* warnings) {
    std::vector<ResolvedIndex> out;
    std::set<NodePath> seen;
    for (const auto& view : views) {
        if (!seen.insert(view.path).second) {
            continue;
        }
        if (const ViewIndex* index = tree.find(view.path)) {
            out.push_back({view, index});
        } else if (warnings != nullptr) {
            warnings->push_back("view " + view.path.str() + " has no index");
        }
    }
    return out;
}

std::map<std::string, ScoredDoc> fuse_scores(const Query& query, std::span<const ResolvedIndex> indexes,
                                             const FusionOptions& options) {
    std::map<std::string, ScoredDoc> fused;
    for (const auto& [view, index] : indexes) {
        std::vector<double> scores = index->score(query);
        if (options.normalize && !scores.empty()) {
            const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
            const double min = *lo;
            const double range = *hi - *lo;
            for (auto& s : scores) {
                s = range > 0.0 ? (s - min) / range : (s > 0.0 ? 1.0 : 0.0);
            }
        }
        const auto& ids = index->ids();
        for (size_t i = 0; i < ids.size(); ++i) {
            auto [it, inserted] = fused.try_emplace(ids[i]);
            ScoredDoc& doc = it->second;
            doc.per_view_scores.emplace_back(view, scores[i]);
            // Strict comparison: on ties the earlier view stays the best view.
            if (inserted || scores[i] > doc.score) {
                doc.paper_id = ids[i];
                doc.score = scores[i];
                doc.best_view = view;
            }
        }
    }
    return fused;
}

std::vector<ScoredDoc> rank_top(std::map<std::string, ScoredDoc> fused, size_t m) {
    std::vector<ScoredDoc> ranked;
    ranked.reserve(fused.size());
    for (auto& [id, doc] : fused) {
        ranked.push_back(std::move(doc));
    }
    const auto before = [](const ScoredDoc& a, const ScoredDoc& b) {
        return a.score != b.score ? a.score > b.score : a.paper_id < b.paper_id;
    };
    if (ranked.size() > m) {
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(m), ranked.end(), before);
        ranked.resize(m);
    } else {
        std::sort(ranked.begin(), ranked.end(), before);
    }
    return ranked;
}

namespace {

void check_search_args(std::string_view query, const SearchOptions& options) {
    if (trim(query).empty()) {
        throw std::invalid_argument("empty query");
    }
    if (options.k == 0) {
        throw std::invalid_argument("k must be positive");
    }
    if (options.m == 0) {
        throw std::invalid_argument("m must be positive");
    }
}

SearchResult run_views(std::string_view query, const IndexTree& tree, RecognizerOutput views, bool manual,
                       const SearchOptions& options, ContentModel* model, StageTimings timings) {
    SearchResult result;
    result.query = std::string(query);
    result.manual_views = manual;
    auto start = Clock::now();
    const auto resolved = lookup(tree, views.views);
    timings.lookup = since(start);
    start = Clock::now();
    if (!resolved.empty()) {
        const Query prepared = tree.make_query(query, model);
        result.ranked = rank_top(fuse_scores(prepared, resolved, options.fusion), options.m);
    }
    timings.fuse = since(start);
    result.views_used = std::move(views);
    result.timings = timings;
    return result;
}

}  // namespace

SearchResult search(std::string_view query, const IndexTree& tree, Recognizer& recognizer,
                    const ViewCatalog& catalog, const SearchOptions& options, ContentModel* model) {
    check_search_args(query, options);
    StageTimings timings;
    const auto start = Clock::now();
    RecognizerOutput views = identify(query, options.k, recognizer, catalog, options.filter);
    timings.identify = since(start);
    return run_views(query, tree, std::move(views), false, options, model, timings);
}

SearchResult search_with_views(std::string_view query, const IndexTree& tree, std::span<const View> views,
                               const SearchOptions& options, ContentModel* model) {
    check_search_args(query, options);
    if (views.empty()) {
        throw std::invalid_argument("no views given");
    }
    return run_views(query, tree, RecognizerOutput{{views.begin(), views.end()}, {}}, true, options, model, {});
}

// ---------------------------------------------------------------------------
// Baselines

std::string_view to_string(BaselineMode mode) {
    switch (mode) {
        case BaselineMode::Title: return "title";
        case BaselineMode::Abstract: return "abstract";
        case BaselineMode::FullText: return "fulltext";
        case BaselineMode::Chunk512: return "chunk512";
        case BaselineMode::Paragraph: return "paragraph";
    }
    return "title";
}

BaselineMode parse_baseline_mode(std::string_view text) {
    for (auto mode : {BaselineMode::Title, BaselineMode::Abstract, BaselineMode::FullText, BaselineMode::Chunk512,
                      BaselineMode::Paragraph}) {
        if (text == to_string(mode)) {
            return mode;
        }
    }
    if (text == "full_text") {
        return BaselineMode::FullText;
    }
    throw std::invalid_argument("unknown baseline '" + std::string(text) + "'");
}

std::string_view to_string(PartFusion fusion) {
    return fusion == PartFusion::Max ? "max" : "avg";
}

PartFusion parse_part_fusion(std::string_view text) {
    if (text == "avg") {
        return PartFusion::Avg;
    }
    if (text == "max") {
        return PartFusion::Max;
    }
    throw std::invalid_argument("unknown part fusion '" + std::string(text) + "' (expected avg or max)");
}

std::vector<std::string> chunk_tokens(std::string_view text, size_t window, const TokenizerOptions& tokenizer) {
    if (window == 0) {
        throw std::invalid_argument("chunk window must be positive");
    }
    const auto tokens = tokenize(text, tokenizer);
    std::vector<std::string> chunks;
    for (size_t start = 0; start < tokens.size(); start += window) {
        const size_t end = std::min(tokens.size(), start + window);
        std::string chunk;
        for (size_t i = start; i < end; ++i) {
            if (i > start) {
                chunk.push_back(' ');
            }
            chunk += tokens[i];
        }
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

namespace {

std::vector<std::string> parts_of(const PaperDoc& doc, BaselineMode mode, const TokenizerOptions& tokenizer) {
    const auto single = [](std::string_view text) {
        return trim(text).empty() ? std::vector<std::string>{} : std::vector<std::string>{std::string(text)};
    };
    switch (mode) {
        case BaselineMode::Title: return single(doc.title);
        case BaselineMode::Abstract: return single(doc.abstract);
        case BaselineMode::FullText: return single(doc.full_text);
        case BaselineMode::Chunk512: return chunk_tokens(doc.full_text, kChunkTokens, tokenizer);
        case BaselineMode::Paragraph: return split_paragraphs(doc.full_text);
    }
    return {};
}

}  // namespace

BaselineIndex::BaselineIndex(std::span<const PaperDoc> corpus, BaselineMode mode, IndexKind kind, ContentModel* model,
                             const IndexOptions& options)
    : mode_(mode), kind_(kind), options_(options) {
    if (kind == IndexKind::Dense && model == nullptr) {
        throw IndexError("dense baseline needs an embedding backend");
    }
    std::vector<std::string> part_ids;
    std::vector<std::vector<std::string>> token_parts;
    std::vector<std::vector<double>> vectors;
    for (const auto& doc : corpus) {
        const auto parts = parts_of(doc, mode, options.tokenizer);
        if (parts.empty()) {
            excluded_.push_back(doc.id);
            continue;
        }
        const size_t owner = paper_ids_.size();
        paper_ids_.push_back(doc.id);
        for (size_t p = 0; p < parts.size(); ++p) {
            part_ids.push_back(doc.id + "#" + std::to_string(p));
            owners_.push_back(owner);
            if (kind == IndexKind::Lexical) {
                token_parts.push_back(tokenize(parts[p], options.tokenizer));
            } else {
                vectors.push_back(model->embed(parts[p]).values);
            }
        }
    }
    NodePath view{"baseline", std::string(to_string(mode))};
    if (kind == IndexKind::Lexical) {
        parts_.emplace(std::move(view), LexicalIndex::build(std::move(part_ids), token_parts, options.bm25));
    } else {
        parts_.emplace(std::move(view), DenseIndex::build(std::move(part_ids), vectors));
    }
}

SearchResult BaselineIndex::search(std::string_view query, PartFusion fusion, size_t m, ContentModel* model) const {
    if (trim(query).empty()) {
        throw std::invalid_argument("empty query");
    }
    if (m == 0) {
        throw std::invalid_argument("m must be positive");
    }
    const auto start = Clock::now();
    Query prepared;
    prepared.text = std::string(query);
    prepared.tokens = tokenize(query, options_.tokenizer);
    if (kind_ == IndexKind::Dense) {
        if (model == nullptr) {
            throw IndexError("dense baseline needs an embedding backend to encode queries");
        }
        prepared.embedding = model->embed(query);
    }
    const auto scores = parts_->score(prepared);
    std::vector<double> best(paper_ids_.size(), 0.0);
    std::vector<double> sum(paper_ids_.size(), 0.0);
    std::vector<size_t> count(paper_ids_.size(), 0);
    for (size_t p = 0; p < scores.size(); ++p) {
        const size_t owner = owners_[p];
        best[owner] = count[owner] == 0 ? scores[p] : std::max(best[owner], scores[p]);
        sum[owner] += scores[p];
        ++count[owner];
    }
    std::map<std::string, ScoredDoc> fused;
    for (size_t i = 0; i < paper_ids_.size(); ++i) {
        ScoredDoc doc;
        doc.paper_id = paper_ids_[i];
        doc.score = fusion == PartFusion::Max ? best[i] : sum[i] / static_cast<double>(count[i]);
        fused.emplace(paper_ids_[i], std::move(doc));
    }
    SearchResult result;
    result.query = std::string(query);
    result.ranked = rank_top(std::move(fused), m);
    result.timings.fuse = since(start);
    return result;
}

SearchResult baseline_search(std::string_view query, std::span<const PaperDoc> corpus, BaselineMode mode,
                             PartFusion fusion, size_t m, IndexKind kind, ContentModel* model) {
    return BaselineIndex(corpus, mode, kind, model).search(query, fusion, m, model);
}

}  // namespace registerdex
