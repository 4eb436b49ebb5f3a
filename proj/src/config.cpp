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

#include "registerdex/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "registerdex/error.hpp"
#include "registerdex/hashing.hpp"

namespace registerdex {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string_view to_string(OnExtractError policy) {
    return policy == OnExtractError::Blank ? "blank" : "fail";
}

OnExtractError parse_on_extract_error(const std::string& text) {
    if (text == "fail") {
        return OnExtractError::Fail;
    }
    if (text == "blank") {
        return OnExtractError::Blank;
    }
    throw ConfigError("on_extract_error must be 'fail' or 'blank', got '" + text + "'");
}

std::string want_string(const std::string& key, const json& v) {
    if (!v.is_string()) {
        throw ConfigError("config key '" + key + "': expected a string");
    }
    return v.get<std::string>();
}

bool want_bool(const std::string& key, const json& v) {
    if (!v.is_boolean()) {
        throw ConfigError("config key '" + key + "': expected true or false");
    }
    return v.get<bool>();
}

std::int64_t want_int(const std::string& key, const json& v) {
    if (!v.is_number_integer()) {
        throw ConfigError("config key '" + key + "': expected an integer");
    }
    return v.get<std::int64_t>();
}

size_t want_count(const std::string& key, const json& v) {
    const std::int64_t n = want_int(key, v);
    if (n < 0) {
        throw ConfigError("config key '" + key + "': must not be negative");
    }
    return static_cast<size_t>(n);
}

int want_small_int(const std::string& key, const json& v) {
    const std::int64_t n = want_int(key, v);
    if (n < INT32_MIN || n > INT32_MAX) {
        throw ConfigError("config key '" + key + "': out of range");
    }
    return static_cast<int>(n);
}

void apply(ServiceConfig& c, const std::string& key, const json& v) {
    if (key == "corpus") c.corpus = want_string(key, v);
    else if (key == "schema_dir") c.schema_dir = want_string(key, v);
    else if (key == "register_store") c.register_store = want_string(key, v);
    else if (key == "index_dir") c.index_dir = want_string(key, v);
    else if (key == "transcripts") c.transcripts = want_string(key, v);
    else if (key == "index_kind") {
        try {
            c.index_kind = parse_index_kind(want_string(key, v));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    else if (key == "k") c.k = want_count(key, v);
    else if (key == "m") c.m = want_count(key, v);
    else if (key == "recognizer") c.recognizer = want_string(key, v);
    else if (key == "recognizer_url") c.recognizer_url = want_string(key, v);
    else if (key == "recognizer_fallback") c.recognizer_fallback = want_bool(key, v);
    else if (key == "model_backend") c.model_backend = want_string(key, v);
    else if (key == "embedder") c.embedder = want_string(key, v);
    else if (key == "embedding_dim") c.embedding_dim = want_count(key, v);
    else if (key == "llm_model") c.llm_model = want_string(key, v);
    else if (key == "embedding_model") c.embedding_model = want_string(key, v);
    else if (key == "normalize") c.normalize = want_bool(key, v);
    else if (key == "remove_stopwords") c.remove_stopwords = want_bool(key, v);
    else if (key == "enrich") c.enrich = want_bool(key, v);
    else if (key == "on_extract_error") c.on_extract_error = parse_on_extract_error(want_string(key, v));
    else if (key == "max_content_bytes") c.max_content_bytes = want_count(key, v);
    else if (key == "max_in_flight") c.max_in_flight = want_small_int(key, v);
    else if (key == "retries") c.retries = want_small_int(key, v);
    else if (key == "timeout_ms") c.timeout_ms = want_small_int(key, v);
    else if (key == "backoff_ms") c.backoff_ms = want_small_int(key, v);
    else if (key == "parallel_papers") c.parallel_papers = want_count(key, v);
    else if (key == "parallel_views") c.parallel_views = want_count(key, v);
    else if (key == "parallel_queries") c.parallel_queries = want_count(key, v);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(want_count(key, v));
    else if (key == "host") c.host = want_string(key, v);
    else if (key == "port") c.port = want_small_int(key, v);
    else throw ConfigError("unknown config key '" + key + "'");
}

// Converts an environment string to the JSON type the key's default has.
json env_value(const std::string& key, const json& default_value, const std::string& text) {
    if (default_value.is_boolean()) {
        if (text == "1" || text == "true" || text == "yes" || text == "on") {
            return true;
        }
        if (text == "0" || text == "false" || text == "no" || text == "off") {
            return false;
        }
        throw ConfigError("environment value for '" + key + "' is not a boolean: '" + text + "'");
    }
    if (default_value.is_number()) {
        size_t used = 0;
        long long n = 0;
        try {
            n = std::stoll(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size()) {
            throw ConfigError("environment value for '" + key + "' is not an integer: '" + text + "'");
        }
        return n;
    }
    return text;
}

std::string upper(std::string text) {
    for (auto& ch : text) {
        ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    }
    return text;
}

}  // namespace

void ServiceConfig::validate() const {
    if (k < 1) {
        throw ConfigError("k must be at least 1");
    }
    if (m < 1) {
        throw ConfigError("m must be at least 1");
    }
    if (recognizer != "lexical" && recognizer != "remote") {
        throw ConfigError("recognizer must be 'lexical' or 'remote', got '" + recognizer + "'");
    }
    if (recognizer == "remote" && recognizer_url.empty()) {
        throw ConfigError("remote recognizer needs recognizer_url");
    }
    if (model_backend != "replay" && model_backend != "record" && model_backend != "remote" &&
        model_backend != "extractive") {
        throw ConfigError("model_backend must be replay, record, remote or extractive, got '" + model_backend + "'");
    }
    if (embedder != "fixture" && embedder != "replay" && embedder != "record" && embedder != "remote") {
        throw ConfigError("embedder must be fixture, replay, record or remote, got '" + embedder + "'");
    }
    if (embedding_dim < 1) {
        throw ConfigError("embedding_dim must be at least 1");
    }
    if (max_in_flight < 1 || retries < 0 || timeout_ms < 1 || backoff_ms < 0) {
        throw ConfigError("transport limits out of range (max_in_flight >= 1, retries >= 0, timeout_ms >= 1)");
    }
    if (parallel_papers < 1 || parallel_views < 1 || parallel_queries < 1) {
        throw ConfigError("parallelism settings must be at least 1");
    }
    if (port < 0 || port > 65535) {
        throw ConfigError("port out of range: " + std::to_string(port));
    }
}

ordered_json ServiceConfig::to_json() const {
    ordered_json out;
    out["corpus"] = corpus.string();
    out["schema_dir"] = schema_dir.string();
    out["register_store"] = register_store.string();
    out["index_dir"] = index_dir.string();
    out["transcripts"] = transcripts.string();
    out["index_kind"] = std::string(registerdex::to_string(index_kind));
    out["k"] = k;
    out["m"] = m;
    out["recognizer"] = recognizer;
    out["recognizer_url"] = recognizer_url;
    out["recognizer_fallback"] = recognizer_fallback;
    out["model_backend"] = model_backend;
    out["embedder"] = embedder;
    out["embedding_dim"] = embedding_dim;
    out["llm_model"] = llm_model;
    out["embedding_model"] = embedding_model;
    out["normalize"] = normalize;
    out["remove_stopwords"] = remove_stopwords;
    out["enrich"] = enrich;
    out["on_extract_error"] = std::string(to_string(on_extract_error));
    out["max_content_bytes"] = max_content_bytes;
    out["max_in_flight"] = max_in_flight;
    out["retries"] = retries;
    out["timeout_ms"] = timeout_ms;
    out["backoff_ms"] = backoff_ms;
    out["parallel_papers"] = parallel_papers;
    out["parallel_views"] = parallel_views;
    out["parallel_queries"] = parallel_queries;
    out["seed"] = seed;
    out["host"] = host;
    out["port"] = port;
    return out;
}

std::string ServiceConfig::fingerprint() const {
    return sha256_hex(to_json().dump());
}

IndexOptions ServiceConfig::index_options() const {
    IndexOptions options;
    options.tokenizer.remove_stopwords = remove_stopwords;
    options.parallel_views = parallel_views;
    return options;
}

BuildOptions ServiceConfig::build_options() const {
    BuildOptions options;
    options.on_extract_error = on_extract_error;
    options.enrich = enrich;
    options.parallel_papers = parallel_papers;
    return options;
}

RetryPolicy ServiceConfig::retry_policy() const {
    RetryPolicy policy;
    policy.max_retries = retries;
    policy.initial_backoff = std::chrono::milliseconds(backoff_ms);
    policy.timeout = std::chrono::milliseconds(timeout_ms);
    policy.max_in_flight = max_in_flight;
    return policy;
}

EnvLookup process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        const char* value = std::getenv(name.c_str());
        if (value == nullptr) {
            return std::nullopt;
        }
        return std::string(value);
    };
}

ServiceConfig config_from_json(const json& layer, ServiceConfig base) {
    if (layer.is_null()) {
        return base;
    }
    if (!layer.is_object()) {
        throw ConfigError("config layer is not an object");
    }
    for (const auto& [key, value] : layer.items()) {
        apply(base, key, value);
    }
    return base;
}

ServiceConfig resolve_config(const json& flags, const std::filesystem::path& config_file, const EnvLookup& env) {
    ServiceConfig config;

    std::filesystem::path file = config_file;
    if (file.empty()) {
        if (auto from_env = env("REGISTERDEX_CONFIG"); from_env && !from_env->empty()) {
            file = *from_env;
        }
    }
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) {
            throw ConfigError("cannot read config file " + file.string());
        }
        std::stringstream buffer;
        buffer << in.rdbuf();
        json layer = json::parse(buffer.str(), nullptr, false);
        if (layer.is_discarded()) {
            throw ConfigError("config file " + file.string() + " is not valid JSON");
        }
        config = config_from_json(layer, config);
    }

    const ordered_json defaults = ServiceConfig{}.to_json();
    json env_layer = json::object();
    for (const auto& [key, default_value] : defaults.items()) {
        if (auto value = env("REGISTERDEX_" + upper(key))) {
            env_layer[key] = env_value(key, default_value, *value);
        }
    }
    config = config_from_json(env_layer, config);
    config = config_from_json(flags, config);
    config.validate();
    return config;
}

}  // namespace registerdex
