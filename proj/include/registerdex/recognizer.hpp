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
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "registerdex/schema.hpp"
#include "registerdex/text.hpp"
#include "registerdex/transport.hpp"

namespace registerdex {

struct View {
    NodePath path;
    PaperType schema_type = PaperType::AlgorithmInnovation;

    bool operator==(const View&) const = default;
};

struct RecognizerOutput {
    std::vector<View> views;
    /// Empty, or parallel to `views` and non-increasing.
    std::vector<double> scores;
};

/// Restricts the candidate views to a set of depths (node counts). An empty
/// set allows everything.
struct ViewFilter {
    std::set<size_t> depths;

    bool allows(const NodePath& path) const { return depths.empty() || depths.contains(path.depth()); }
};

/// Every node path of every schema, deduplicated by path string (the first
/// schema in PaperType order owns a shared path), plus a prefix tree for
/// validating free-form recognizer output.
class ViewCatalog {
public:
    struct Candidate {
        View view;
        /// Name and description of the terminal node in every schema that
        /// contains the path.
        std::vector<std::string> texts;
    };

    explicit ViewCatalog(const SchemaSet& schemas);

    const std::vector<Candidate>& candidates() const { return candidates_; }
    const PathTrie& trie() const { return trie_; }
    const SchemaSet& schemas() const { return *schemas_; }

    /// Resolves a path string; nullopt if it is not a view of any schema.
    std::optional<View> resolve(std::string_view joined) const;
    std::optional<View> resolve(const NodePath& path) const;
    bool valid(const View& view) const;

private:
    const SchemaSet* schemas_;
    std::vector<Candidate> candidates_;
    std::map<std::string, size_t, std::less<>> by_path_;
    PathTrie trie_;
};

class Recognizer {
public:
    virtual ~Recognizer() = default;
    /// Backend-specific ranking; identify() validates and trims the result.
    virtual RecognizerOutput recognize(std::string_view query, size_t k, const ViewFilter& filter) = 0;
};

/// Validated top-K views: drops views that do not traverse the schema prefix
/// tree or fail the filter, removes duplicates, truncates to k. Throws
/// std::invalid_argument for an empty query or k == 0.
RecognizerOutput identify(std::string_view query, size_t k, Recognizer& recognizer, const ViewCatalog& catalog,
                          const ViewFilter& filter = {});

/// TF-IDF cosine between the query and each candidate's name + description.
/// Ties: shorter path first, then segment-wise lexicographic.
class LexicalRecognizer final : public Recognizer {
public:
    LexicalRecognizer(const ViewCatalog& catalog, TokenizerOptions tokenizer = {.remove_stopwords = true});
    RecognizerOutput recognize(std::string_view query, size_t k, const ViewFilter& filter) override;

    /// Full similarity table (candidate index -> score), for oracle checks.
    std::vector<double> similarities(std::string_view query) const;

private:
    const ViewCatalog& catalog_;
    TokenizerOptions tokenizer_;
    std::map<std::string, double, std::less<>> idf_;
    std::vector<std::map<std::string, double, std::less<>>> vectors_;
};

RecognizerOutput lexical_identify(std::string_view query, size_t k, const ViewCatalog& catalog);

/// HTTP recognizer: POST {query, k} -> {paths: [string]}. Invalid paths are
/// dropped and the remainder back-filled from the lexical recognizer; on
/// transport failure falls back to lexical entirely when `fallback_on_error`.
class RemoteRecognizer final : public Recognizer {
public:
    RemoteRecognizer(std::string endpoint_url, std::shared_ptr<HttpTransport> transport, const ViewCatalog& catalog,
                     bool fallback_on_error = true, RetryPolicy policy = {});
    RecognizerOutput recognize(std::string_view query, size_t k, const ViewFilter& filter) override;

    std::vector<std::string> warnings() const;

private:
    std::string endpoint_url_;
    std::shared_ptr<HttpTransport> transport_;
    const ViewCatalog& catalog_;
    LexicalRecognizer lexical_;
    bool fallback_on_error_;
    RetryPolicy policy_;
    InFlightLimiter limiter_;
    mutable std::mutex mutex_;
    std::vector<std::string> warnings_;
};

/// Always answers with the same views.
class FixedRecognizer final : public Recognizer {
public:
    explicit FixedRecognizer(std::vector<View> views) : views_(std::move(views)) {}
    RecognizerOutput recognize(std::string_view query, size_t k, const ViewFilter& filter) override;

private:
    std::vector<View> views_;
};

/// Looks the golden view up by query text. Under a depth filter the golden
/// view is projected onto the allowed depths: its nearest allowed ancestor,
/// otherwise its shallowest allowed descendants.
class OracleRecognizer final : public Recognizer {
public:
    OracleRecognizer(std::map<std::string, View, std::less<>> golden, const ViewCatalog& catalog);
    RecognizerOutput recognize(std::string_view query, size_t k, const ViewFilter& filter) override;

private:
    std::map<std::string, View, std::less<>> golden_;
    const ViewCatalog& catalog_;
};

/// Never returns the golden view: picks the k candidates with the lowest
/// hierarchical reward against it.
class AdversarialRecognizer final : public Recognizer {
public:
    AdversarialRecognizer(std::map<std::string, View, std::less<>> golden, const ViewCatalog& catalog);
    RecognizerOutput recognize(std::string_view query, size_t k, const ViewFilter& filter) override;

private:
    std::map<std::string, View, std::less<>> golden_;
    const ViewCatalog& catalog_;
};

/// Uniform sample of k candidates, seeded by (seed, query).
class RandomRecognizer final : public Recognizer {
public:
    RandomRecognizer(const ViewCatalog& catalog, std::uint64_t seed);
    RecognizerOutput recognize(std::string_view query, size_t k, const ViewFilter& filter) override;

private:
    const ViewCatalog& catalog_;
    std::uint64_t seed_;
};

/// Longest common prefix of the two paths, counted in nodes.
size_t path_overlap(const NodePath& a, const NodePath& b);

/// overlap / |predicted| + overlap / |golden|, in [0, 2]; 2 iff equal paths.
double hierarchical_reward(const View& golden, const View& predicted);
double hierarchical_reward(const NodePath& golden, const NodePath& predicted);

struct RecognizerExample {
    std::string query;
    View golden_view;
    std::optional<std::string> paper_id;
};

/// One JSON line per example: {"query", "golden_view": "A/B/C", "schema_type", "paper_id"?}.
std::vector<RecognizerExample> load_recognizer_examples(const std::filesystem::path& file,
                                                        const ViewCatalog& catalog);
void write_recognizer_examples(const std::filesystem::path& file, std::span<const RecognizerExample> examples);

struct RecognizerReport {
    double top1_accuracy = 0.0;
    double mean_reward = 0.0;
    size_t examples = 0;
    /// golden path -> predicted path (or "" for no prediction) -> count.
    std::map<std::string, std::map<std::string, size_t>> confusion;
};

RecognizerReport evaluate_recognizer(std::span<const RecognizerExample> examples, Recognizer& recognizer,
                                     const ViewCatalog& catalog, size_t k);

}  // namespace registerdex
