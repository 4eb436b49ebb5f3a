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
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "registerdex/index_tree.hpp"
#include "registerdex/register_builder.hpp"

namespace registerdex {

/// Effective configuration of the CLI and the service.
///
/// Layers, lowest to highest precedence: built-in defaults, the JSON config
/// file (REGISTERDEX_CONFIG or --config), REGISTERDEX_<KEY> environment
/// variables, command-line flags. Keys are the snake_case field names below.
struct ServiceConfig {
    std::filesystem::path corpus;
    std::filesystem::path schema_dir;  // empty: shipped schemas
    std::filesystem::path register_store = "registers.jsonl";
    std::filesystem::path index_dir = "index";
    std::filesystem::path transcripts;  // replay source / record target

    IndexKind index_kind = IndexKind::Lexical;
    size_t k = 5;
    size_t m = 10;

    std::string recognizer = "lexical";  // lexical | remote
    std::string recognizer_url;
    bool recognizer_fallback = true;

    std::string model_backend = "replay";  // replay | record | remote | extractive
    std::string embedder = "fixture";      // fixture | replay | record | remote
    size_t embedding_dim = 64;
    std::string llm_model = "default";
    std::string embedding_model = "default";

    bool normalize = false;
    bool remove_stopwords = false;
    bool enrich = false;
    OnExtractError on_extract_error = OnExtractError::Fail;
    size_t max_content_bytes = 8192;

    int max_in_flight = 8;
    int retries = 3;
    int timeout_ms = 120000;
    int backoff_ms = 500;
    size_t parallel_papers = 4;
    size_t parallel_views = 4;
    size_t parallel_queries = 4;

    std::uint64_t seed = 42;

    std::string host = "127.0.0.1";
    int port = 8080;

    /// Throws ConfigError on K/M < 1 or unknown enum values.
    void validate() const;
    nlohmann::ordered_json to_json() const;
    /// SHA-256 of to_json().dump().
    std::string fingerprint() const;

    IndexOptions index_options() const;
    BuildOptions build_options() const;
    RetryPolicy retry_policy() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

EnvLookup process_env();

/// Applies the precedence chain. `flags` holds only options the user set.
/// `config_file` overrides REGISTERDEX_CONFIG when non-empty.
ServiceConfig resolve_config(const nlohmann::json& flags, const std::filesystem::path& config_file = {},
                             const EnvLookup& env = process_env());

ServiceConfig config_from_json(const nlohmann::json& layer, ServiceConfig base = {});

}  // namespace registerdex
