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
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "registerdex/config.hpp"
#include "registerdex/content_model.hpp"
#include "registerdex/eval.hpp"
#include "registerdex/index_tree.hpp"
#include "registerdex/recognizer.hpp"
#include "registerdex/register_builder.hpp"
#include "registerdex/retrieval.hpp"

namespace registerdex {

SchemaSet schemas_for(const ServiceConfig& config);

/// Content model wired per config: generator from `model_backend`, embedder
/// from `embedder`. Remote endpoints come from REGISTERDEX_LLM_* and
/// REGISTERDEX_EMB_*.
std::shared_ptr<ContentModel> make_content_model(const ServiceConfig& config,
                                                 std::shared_ptr<HttpTransport> transport = nullptr);

/// Loaded, read-only search state shared by `search`, `identify`, the HTTP
/// service and the Python binding.
class Engine {
public:
    /// Loads schemas, the index and, when present, the corpus and register store.
    static std::shared_ptr<Engine> open(const ServiceConfig& config,
                                        std::shared_ptr<HttpTransport> transport = nullptr);

    const ServiceConfig& config() const { return config_; }
    const IndexTree& tree() const { return *tree_; }
    const ViewCatalog& catalog() const { return *catalog_; }
    const SchemaSet& schemas() const { return schemas_; }

    const PaperDoc* paper(std::string_view id) const;
    const HierarchicalRegister* paper_register(std::string_view id) const;

    /// `views` (path strings) bypass the recognizer when non-empty; invalid
    /// ones raise std::invalid_argument. k/m default to the config.
    SearchResult search(std::string_view query, std::optional<size_t> k = {}, std::optional<size_t> m = {},
                        const std::vector<std::string>& views = {}) const;
    RecognizerOutput identify(std::string_view query, std::optional<size_t> k = {}) const;

private:
    Engine() = default;

    ServiceConfig config_;
    SchemaSet schemas_;
    std::unique_ptr<ViewCatalog> catalog_;
    std::unique_ptr<IndexTree> tree_;
    std::unique_ptr<Recognizer> recognizer_;
    std::shared_ptr<ContentModel> model_;
    std::map<std::string, PaperDoc, std::less<>> papers_;
    std::map<std::string, HierarchicalRegister, std::less<>> registers_;
};

struct BuildRegistersSummary {
    size_t papers = 0;
    size_t built = 0;
    size_t reused = 0;
    size_t generator_calls = 0;
    std::vector<std::string> warnings;
};

/// Corpus -> register store. Resumable: finished papers are appended to
/// "<store>.partial" and reused on the next run.
BuildRegistersSummary cmd_build_registers(const ServiceConfig& config,
                                          std::shared_ptr<HttpTransport> transport = nullptr);

struct BuildIndexSummary {
    size_t registers = 0;
    std::map<std::string, size_t> doc_counts;  // view path -> doc_count
    std::string manifest_sha256;
};

BuildIndexSummary cmd_build_index(const ServiceConfig& config, std::shared_ptr<HttpTransport> transport = nullptr);

SearchResult cmd_search(const ServiceConfig& config, std::string_view query,
                        const std::vector<std::string>& views = {});

RecognizerOutput cmd_identify(const ServiceConfig& config, std::string_view query);

/// Runs the systems over `dataset` and writes report.json (deterministic),
/// report.txt and timings.json into `out_dir` when it is non-empty.
BenchReport cmd_eval(const ServiceConfig& config, const std::vector<std::string>& systems,
                     const std::filesystem::path& dataset, const std::filesystem::path& out_dir,
                     std::shared_ptr<HttpTransport> transport = nullptr);

/// Exclusive advisory lock on "<dir>/.lock" held for the object's lifetime.
class DirectoryLock {
public:
    explicit DirectoryLock(const std::filesystem::path& dir);
    ~DirectoryLock();
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    int fd_ = -1;
};

}  // namespace registerdex
