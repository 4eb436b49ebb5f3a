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

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "registerdex/bm25.hpp"
#include "registerdex/content_model.hpp"
#include "registerdex/register_builder.hpp"
#include "registerdex/schema.hpp"
#include "registerdex/text.hpp"

namespace registerdex {

enum class IndexKind { Lexical, Dense };

std::string_view to_string(IndexKind kind);
IndexKind parse_index_kind(std::string_view text);

/// A query prepared once for every view it is scored against.
struct Query {
    std::string text;
    std::vector<std::string> tokens;
    std::optional<EmbeddingVector> embedding;
};

/// Searchable index over the contents of every paper at one node path. Papers
/// whose content at the path is empty are not indexed.
class ViewIndex {
public:
    ViewIndex(NodePath view, LexicalIndex index);
    ViewIndex(NodePath view, DenseIndex index);

    const NodePath& view() const { return view_; }
    IndexKind kind() const;
    size_t doc_count() const;
    const std::vector<std::string>& ids() const;

    /// Scores aligned with ids().
    std::vector<double> score(const Query& query) const;

    const LexicalIndex* lexical() const { return std::get_if<LexicalIndex>(&index_); }
    const DenseIndex* dense() const { return std::get_if<DenseIndex>(&index_); }

private:
    NodePath view_;
    std::variant<LexicalIndex, DenseIndex> index_;
};

std::map<std::string, double> lexical_scores(const ViewIndex& index, std::string_view query,
                                             const TokenizerOptions& tokenizer = {});
std::map<std::string, double> dense_scores(const ViewIndex& index, const EmbeddingVector& query);

enum class EmbedFailurePolicy { Abort, Skip };

struct IndexOptions {
    TokenizerOptions tokenizer;
    Bm25Params bm25;
    size_t parallel_views = 4;
    EmbedFailurePolicy on_embed_error = EmbedFailurePolicy::Abort;
};

/// One ViewIndex per node path seen in any register. Immutable once built.
class IndexTree {
public:
    IndexTree(IndexKind kind, IndexOptions options, std::map<PaperType, std::string> schema_versions,
              std::vector<std::string> corpus_ids, std::map<NodePath, ViewIndex> views);

    IndexKind kind() const { return kind_; }
    const IndexOptions& options() const { return options_; }
    const std::map<PaperType, std::string>& schema_versions() const { return schema_versions_; }
    const std::vector<std::string>& corpus_ids() const { return corpus_ids_; }
    const std::map<NodePath, ViewIndex>& views() const { return views_; }
    const ViewIndex* find(const NodePath& view) const;

    /// Tokenizes, and embeds for Dense trees (which requires `model`).
    Query make_query(std::string_view text, ContentModel* model) const;

private:
    IndexKind kind_;
    IndexOptions options_;
    std::map<PaperType, std::string> schema_versions_;
    std::vector<std::string> corpus_ids_;
    std::map<NodePath, ViewIndex> views_;
};

/// `model` is only consulted for Dense trees. Embedding failures abort the
/// build or skip the (paper, path) pair according to options.on_embed_error.
IndexTree build_index_tree(std::span<const HierarchicalRegister> registers, IndexKind kind, ContentModel* model,
                           const IndexOptions& options = {});

/// Writes manifest.json plus one binary file per view; returns the SHA-256 of
/// the manifest. Output is byte-identical for identical trees.
std::string save_index(const IndexTree& tree, const std::filesystem::path& dir);
/// Throws FormatVersionError or CorruptionError (checksum mismatch).
IndexTree load_index(const std::filesystem::path& dir);

inline constexpr int kIndexFormatVersion = 1;

}  // namespace registerdex
