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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "registerdex/content_model.hpp"
#include "registerdex/error.hpp"
#include "registerdex/schema.hpp"

namespace registerdex {

/// Per-paper content for every node path of the paper's schema, blanks
/// included.
struct HierarchicalRegister {
    std::string paper_id;
    PaperType paper_type = PaperType::AlgorithmInnovation;
    std::string schema_version;
    std::map<NodePath, std::string> contents;

    const std::string& at(const NodePath& path) const;
    bool operator==(const HierarchicalRegister&) const = default;
};

/// {"paper_id", "paper_type", "schema_version", "contents": {"A/B": "..."}}.
nlohmann::ordered_json to_json(const HierarchicalRegister& reg);
HierarchicalRegister register_from_json(const nlohmann::json& record);
std::string serialize_register(const HierarchicalRegister& reg);

/// Checks total coverage and path validity against the schema.
void check_register(const HierarchicalRegister& reg, const RegisterSchema& schema);

enum class OnExtractError { Fail, Blank };

struct BuildOptions {
    OnExtractError on_extract_error = OnExtractError::Fail;
    /// Extra attempts for a failed node call, on top of the transport's own retries.
    int node_retries = 1;
    /// Appends the best-matching source paragraph to each non-empty node.
    bool enrich = false;
    size_t parallel_papers = 4;
};

HierarchicalRegister build_register(const PaperDoc& doc, const SchemaSet& schemas, ContentModel& model,
                                    const BuildOptions& options = {});

struct BuildFailure {
    std::string paper_id;
    std::string message;
};

class CorpusBuildError : public BuildError {
public:
    explicit CorpusBuildError(std::vector<BuildFailure> failures);
    const std::vector<BuildFailure>& failures() const { return failures_; }

private:
    std::vector<BuildFailure> failures_;
};

/// Hook invoked after each paper finishes (from worker threads, serialized).
using RegisterSink = std::function<void(const HierarchicalRegister&)>;

/// Builds one register per paper, in input order. `cache` entries whose
/// (paper_id, schema_version) matches are reused without model calls. Throws
/// CorpusBuildError listing every failed paper.
std::vector<HierarchicalRegister> build_corpus_registers(std::span<const PaperDoc> corpus, const SchemaSet& schemas,
                                                         ContentModel& model, const BuildOptions& options = {},
                                                         const std::vector<HierarchicalRegister>* cache = nullptr,
                                                         const RegisterSink& sink = {});

/// Register store file: one JSON line per paper, sorted by paper_id.
std::vector<HierarchicalRegister> load_register_store(const std::filesystem::path& file);
void write_register_store(const std::filesystem::path& file, std::vector<HierarchicalRegister> registers);

}  // namespace registerdex
