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

#include <chrono>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "registerdex/content_model.hpp"
#include "registerdex/index_tree.hpp"
#include "registerdex/recognizer.hpp"

namespace registerdex {

struct ScoredDoc {
    std::string paper_id;
    double score = 0.0;
    /// View attaining `score`; unset for baseline systems that have no views.
    std::optional<View> best_view;
    std::vector<std::pair<View, double>> per_view_scores;
};

struct StageTimings {
    std::chrono::microseconds identify{0};
    std::chrono::microseconds lookup{0};
    std::chrono::microseconds fuse{0};
};

struct SearchResult {
    std::string query;
    RecognizerOutput views_used;
    bool manual_views = false;
    std::vector<ScoredDoc> ranked;
    StageTimings timings;
};

/// {"query", "views": [...], "results": [{"paper_id", "score", "best_view"}]}.
nlohmann::ordered_json to_json(const SearchResult& result);

struct ResolvedIndex {
    View view;
    const ViewIndex* index;
};

/// One index per distinct view present in the tree, in view order. Views the
/// tree lacks are skipped and reported through `warnings` when given.
std::vector<ResolvedIndex> lookup(const IndexTree& tree, std::span<const View> views,
                                  std::vector<std::string>* warnings = nullptr);

struct FusionOptions {
    /// Min-max normalize each view's scores before taking the max. BM25 scores
    /// from different views are not on one scale; off by default.
    bool normalize = false;
};

/// Max over views of each paper's score. Papers absent from a view get
/// nothing from it; the earliest view attaining the max is the best view.
std::map<std::string, ScoredDoc> fuse_scores(const Query& query, std::span<const ResolvedIndex> indexes,
                                             const FusionOptions& options = {});

/// Descending score, then ascending paper_id; keeps the first `m`.
std::vector<ScoredDoc> rank_top(std::map<std::string, ScoredDoc> fused, size_t m);

struct SearchOptions {
    size_t k = 5;
    size_t m = 10;
    IndexKind kind = IndexKind::Lexical;
    FusionOptions fusion;
    ViewFilter filter;
};

/// Identify views, look them up, fuse, rank. `model` is needed for Dense trees.
SearchResult search(std::string_view query, const IndexTree& tree, Recognizer& recognizer,
                    const ViewCatalog& catalog, const SearchOptions& options, ContentModel* model = nullptr);

/// Same pipeline with caller-chosen views (recognizer skipped).
SearchResult search_with_views(std::string_view query, const IndexTree& tree, std::span<const View> views,
                               const SearchOptions& options, ContentModel* model = nullptr);

enum class BaselineMode { Title, Abstract, FullText, Chunk512, Paragraph };
enum class PartFusion { Avg, Max };

std::string_view to_string(BaselineMode mode);
BaselineMode parse_baseline_mode(std::string_view text);
std::string_view to_string(PartFusion fusion);
PartFusion parse_part_fusion(std::string_view text);

inline constexpr size_t kChunkTokens = 512;

/// Contiguous windows of `window` tokens, re-joined by single spaces.
std::vector<std::string> chunk_tokens(std::string_view text, size_t window, const TokenizerOptions& tokenizer = {});

/// Flat index over whole-paper fields or paper parts (chunks, paragraphs).
class BaselineIndex {
public:
    BaselineIndex(std::span<const PaperDoc> corpus, BaselineMode mode, IndexKind kind, ContentModel* model,
                  const IndexOptions& options = {});

    BaselineMode mode() const { return mode_; }
    size_t part_count() const { return owners_.size(); }
    const std::vector<std::string>& excluded() const { return excluded_; }

    /// `fusion` only matters for the split modes.
    SearchResult search(std::string_view query, PartFusion fusion, size_t m, ContentModel* model = nullptr) const;

private:
    BaselineMode mode_;
    IndexKind kind_;
    IndexOptions options_;
    std::vector<std::string> paper_ids_;
    std::vector<size_t> owners_;  // part -> position in paper_ids_
    std::optional<ViewIndex> parts_;
    std::vector<std::string> excluded_;
};

SearchResult baseline_search(std::string_view query, std::span<const PaperDoc> corpus, BaselineMode mode,
                             PartFusion fusion, size_t m, IndexKind kind, ContentModel* model = nullptr);

}  // namespace registerdex
