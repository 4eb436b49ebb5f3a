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
#include <string>
#include <vector>

#include "registerdex/content_model.hpp"
#include "registerdex/eval.hpp"
#include "registerdex/recognizer.hpp"
#include "registerdex/register_builder.hpp"
#include "registerdex/schema.hpp"

namespace registerdex {

/// Synthetic corpus whose discriminative terms sit at known schema depths.
///
/// Every (paper, node) pair owns two invented marker words that appear only in
/// that node's register content and in the paper's full text. Parents do not
/// inherit their children's markers, so a query built from a node's markers
/// can only be answered from that node's view (or from the full text). The
/// abstract carries the root's markers and those of the first two depth-2
/// nodes, which makes it competitive on coarse queries only.
struct PlantedOptions {
    size_t papers = 240;
    std::uint64_t seed = 42;
    /// Queries generated per granularity tag (capped by available nodes).
    size_t queries_per_tag = 60;
    /// Probability that a leaf is absent from a paper (blank content).
    double blank_leaf_probability = 0.15;
    /// Cycle through all five paper types instead of AlgorithmInnovation only.
    bool mixed_types = true;
    /// Leave declared types unset and ship classification transcripts instead.
    bool classify_via_model = true;
};

struct PlantedCorpus {
    std::vector<PaperDoc> docs;
    /// Replies for every classification, extraction and aggregation request
    /// the register builder will issue for `docs`.
    std::vector<ModelTranscript> transcripts;
    /// The registers those transcripts are designed to produce.
    std::vector<HierarchicalRegister> expected_registers;
    std::vector<EvalQuery> queries;
    std::vector<RecognizerExample> recognizer_examples;
};

/// Granularity tag for a view depth: 1 -> "coarse", 2 -> "fine-1", ...
std::string granularity_tag(size_t depth);

PlantedCorpus generate_planted_corpus(const SchemaSet& schemas, const PlantedOptions& options = {});

/// Writes corpus.jsonl, transcripts.jsonl, eval.jsonl, recognizer_eval.jsonl
/// and expected_registers.jsonl into `dir`.
void write_planted_corpus(const PlantedCorpus& corpus, const std::filesystem::path& dir);

/// Query text -> golden view, for oracle-style recognizers.
std::map<std::string, View, std::less<>> golden_views(std::span<const EvalQuery> queries, const ViewCatalog& catalog);

}  // namespace registerdex
