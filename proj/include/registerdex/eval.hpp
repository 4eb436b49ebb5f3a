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
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "registerdex/index_tree.hpp"
#include "registerdex/recognizer.hpp"
#include "registerdex/retrieval.hpp"

namespace registerdex {

struct EvalQuery {
    std::string query;
    std::vector<std::string> relevant_ids;
    std::string granularity_tag;
    /// "/"-joined golden view, when the query was generated from a register node.
    std::optional<std::string> golden_view;
    std::optional<PaperType> schema_type;
};

/// One JSON line per query: {"query", "relevant_ids": [...], "granularity_tag"?,
/// "golden_view"?, "schema_type"?}. LitSearch-style {"query", "corpusids"} is
/// accepted too. Relevant ids missing from `corpus_ids` (when given) raise
/// DataError, as does an empty relevant set.
std::vector<EvalQuery> load_eval_queries(const std::filesystem::path& file,
                                         const std::vector<std::string>* corpus_ids = nullptr);
void write_eval_queries(const std::filesystem::path& file, std::span<const EvalQuery> queries);

/// |top-k ∩ relevant| / |relevant|.
double recall_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant, size_t k);

enum class SystemType { Register, Baseline };
enum class RecognizerChoice { Lexical, Oracle, Random, Adversarial, Remote };

std::string_view to_string(RecognizerChoice choice);

/// One retrieval configuration under test. Text form, as used on the command line:
///   register[:lexical|oracle|random|adversarial|remote][@depth,depth...]
///   title | abstract | full_text | chunk512[:avg|max] | paragraph[:avg|max]
struct SystemSpec {
    std::string name;
    SystemType type = SystemType::Register;
    RecognizerChoice recognizer = RecognizerChoice::Lexical;
    BaselineMode mode = BaselineMode::Abstract;
    PartFusion fusion = PartFusion::Max;
    ViewFilter filter;
    size_t k = 5;
    bool normalize = false;

    static SystemSpec parse(std::string_view text);
    nlohmann::ordered_json to_json() const;
};

struct BenchContext {
    const IndexTree* tree = nullptr;
    std::span<const PaperDoc> corpus;
    const ViewCatalog* catalog = nullptr;
    ContentModel* model = nullptr;
    IndexKind kind = IndexKind::Lexical;
    std::uint64_t seed = 42;
    size_t parallel_queries = 4;
    /// Only for RecognizerChoice::Remote.
    std::string remote_recognizer_url;
    std::shared_ptr<HttpTransport> transport;
    /// Echoed into the report and its fingerprint.
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
};

struct RecallCell {
    size_t queries = 0;
    double recall_at_5 = 0.0;
    double recall_at_10 = 0.0;
};

struct SystemReport {
    std::string name;
    nlohmann::ordered_json config;
    std::optional<std::string> failure;
    /// Per granularity tag, plus "all".
    std::map<std::string, RecallCell> by_tag;
    double mean_latency_ms = 0.0;

    const RecallCell& cell(const std::string& tag) const;
};

struct BenchReport {
    std::string dataset;
    std::uint64_t seed = 0;
    std::string config_fingerprint;
    nlohmann::ordered_json config;
    std::vector<SystemReport> systems;

    const SystemReport& system(std::string_view name) const;
    /// Runtime numbers are left out unless asked for, so that reports of
    /// identical runs compare byte-for-byte.
    nlohmann::ordered_json to_json(bool include_runtime = false) const;
    std::string to_table() const;
};

/// Every system answers every query with M = 10; recall@5 uses the first five
/// of the same ranking. A system that cannot run (missing index or corpus)
/// gets a failure entry and the run continues.
BenchReport run_benchmark(std::span<const EvalQuery> queries, std::span<const SystemSpec> systems,
                          const BenchContext& context, std::string dataset = "dataset");

/// Benchmarks `base` restricted to views whose depth is in `layers_kept`, for
/// both the recognizer candidates and the lookup.
BenchReport run_layer_ablation(std::span<const EvalQuery> queries, const BenchContext& context,
                               const std::set<size_t>& layers_kept, SystemSpec base,
                               std::string dataset = "dataset");

}  // namespace registerdex
