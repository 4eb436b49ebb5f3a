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

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "registerdex/paper_type.hpp"
#include "registerdex/schema.hpp"
#include "registerdex/transport.hpp"

namespace registerdex {

struct PaperDoc {
    std::string id;
    std::string title;
    std::string abstract;
    std::string full_text;
    std::optional<PaperType> declared_type;
};

nlohmann::ordered_json to_json(const PaperDoc& doc);
PaperDoc paper_from_json(const nlohmann::json& record);

/// Reads a corpus file: one JSON object per line {id, title, abstract,
/// full_text, type?}. Blank lines are skipped. Errors name the 1-based line.
std::vector<PaperDoc> load_corpus(const std::filesystem::path& file);
void write_corpus(const std::filesystem::path& file, std::span<const PaperDoc> docs);

struct EmbeddingVector {
    std::vector<double> values;

    size_t dimension() const { return values.size(); }
};

/// Cosine similarity; 0 when either vector has zero norm.
double cosine(std::span<const double> a, std::span<const double> b);

struct ModelTranscript {
    std::string request_key;
    std::string operation;
    std::string response;
};

/// One call to a generative backend. `prompt` is what a remote model sees;
/// `inputs` carries the same information structured, for local backends.
struct ModelRequest {
    std::string operation;
    std::string key;
    std::string prompt;
    nlohmann::json inputs;
};

/// Stable request key: SHA-256 over operation and prompt.
std::string request_key(std::string_view operation, std::string_view prompt);

/// In-memory view of a transcript file (one {request_key, operation,
/// response} object per line). Read-only after load.
class TranscriptStore {
public:
    TranscriptStore() = default;
    static TranscriptStore load(const std::filesystem::path& file);

    void add(ModelTranscript transcript);
    std::optional<std::string> find(std::string_view key) const;
    size_t size() const { return entries_.size(); }

private:
    std::map<std::string, ModelTranscript, std::less<>> entries_;
};

/// Append-only transcript file writer. Duplicate keys are written once.
class TranscriptWriter {
public:
    explicit TranscriptWriter(std::filesystem::path file);

    void append(const ModelTranscript& transcript);
    const std::filesystem::path& file() const { return file_; }

private:
    std::filesystem::path file_;
    std::mutex mutex_;
    std::map<std::string, bool, std::less<>> written_;
};

void write_transcripts(const std::filesystem::path& file, std::span<const ModelTranscript> transcripts);

class Generator {
public:
    virtual ~Generator() = default;
    virtual std::string complete(const ModelRequest& request) = 0;
};

/// Chat-completions style endpoint (POST {base}/chat/completions).
class RemoteGenerator final : public Generator {
public:
    RemoteGenerator(RemoteEndpoint endpoint, std::shared_ptr<HttpTransport> transport, RetryPolicy policy = {});
    std::string complete(const ModelRequest& request) override;

private:
    RemoteEndpoint endpoint_;
    std::shared_ptr<HttpTransport> transport_;
    RetryPolicy policy_;
    InFlightLimiter limiter_;
};

/// Answers from a transcript store; never touches the network. Unknown keys
/// raise ModelError.
class ReplayGenerator final : public Generator {
public:
    explicit ReplayGenerator(std::shared_ptr<const TranscriptStore> store);
    std::string complete(const ModelRequest& request) override;

private:
    std::shared_ptr<const TranscriptStore> store_;
};

/// Forwards to `inner` and records every request/response pair.
class RecordingGenerator final : public Generator {
public:
    RecordingGenerator(std::shared_ptr<Generator> inner, std::shared_ptr<TranscriptWriter> writer);
    std::string complete(const ModelRequest& request) override;

private:
    std::shared_ptr<Generator> inner_;
    std::shared_ptr<TranscriptWriter> writer_;
};

/// Offline heuristic backend: extraction picks the paper sentences sharing the
/// most content words with the node name and description, aggregation keeps
/// the leading sentence of each child, classification uses keyword cues.
/// Replies are formatted like a model's (fenced JSON) so the same parsers run.
class ExtractiveGenerator final : public Generator {
public:
    explicit ExtractiveGenerator(size_t max_sentences = 2) : max_sentences_(max_sentences) {}
    std::string complete(const ModelRequest& request) override;

private:
    size_t max_sentences_;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual EmbeddingVector embed(std::string_view text) = 0;
    virtual size_t dimension() const = 0;
};

/// Deterministic test embedder: every token seeds a pseudo-random direction,
/// the text vector is the L2-normalized sum. Not meant for quality claims.
class FixtureEmbedder final : public Embedder {
public:
    explicit FixtureEmbedder(size_t dimension = 64, std::uint64_t seed = 0x5eedULL);
    EmbeddingVector embed(std::string_view text) override;
    size_t dimension() const override { return dimension_; }

private:
    size_t dimension_;
    std::uint64_t seed_;
};

/// Embeddings endpoint (POST {base}/embeddings). The reply dimension is
/// checked against the configured one on every call.
class RemoteEmbedder final : public Embedder {
public:
    RemoteEmbedder(RemoteEndpoint endpoint, size_t dimension, std::shared_ptr<HttpTransport> transport,
                   RetryPolicy policy = {});
    EmbeddingVector embed(std::string_view text) override;
    size_t dimension() const override { return dimension_; }

private:
    RemoteEndpoint endpoint_;
    size_t dimension_;
    std::shared_ptr<HttpTransport> transport_;
    RetryPolicy policy_;
    InFlightLimiter limiter_;
};

class RecordingEmbedder final : public Embedder {
public:
    RecordingEmbedder(std::shared_ptr<Embedder> inner, std::shared_ptr<TranscriptWriter> writer);
    EmbeddingVector embed(std::string_view text) override;
    size_t dimension() const override { return inner_->dimension(); }

private:
    std::shared_ptr<Embedder> inner_;
    std::shared_ptr<TranscriptWriter> writer_;
};

class ReplayEmbedder final : public Embedder {
public:
    ReplayEmbedder(std::shared_ptr<const TranscriptStore> store, size_t dimension);
    EmbeddingVector embed(std::string_view text) override;
    size_t dimension() const override { return dimension_; }

private:
    std::shared_ptr<const TranscriptStore> store_;
    size_t dimension_;
};

struct ContentModelOptions {
    size_t max_content_bytes = 8192;
};

struct ChildContent {
    std::string name;
    std::string description;
    std::string content;
};

/// The single entry point for everything model-backed. Safe for concurrent
/// use as long as the generator and embedder are.
class ContentModel {
public:
    ContentModel(std::shared_ptr<Generator> generator, std::shared_ptr<Embedder> embedder,
                 ContentModelOptions options = {});

    /// Declared type short-circuits the model. Unparseable replies fall back to
    /// AlgorithmInnovation and leave a warning.
    PaperType classify_paper_type(const PaperDoc& doc);

    /// Empty result means the paper has nothing for this node.
    std::string extract_leaf_content(const PaperDoc& doc, const SchemaNode& node, const NodePath& path);

    /// Summarizes the non-empty children into the parent's content. Returns ""
    /// without a model call when every child is empty.
    std::string aggregate_contents(const NodePath& parent, std::span<const ChildContent> children);

    EmbeddingVector embed(std::string_view text);
    size_t embedding_dimension() const;

    std::vector<std::string> warnings() const;
    /// Logs and records a warning; the builder reports its own through here.
    void warn(std::string message);
    size_t generator_calls() const { return generator_calls_.load(); }
    size_t embed_calls() const { return embed_calls_.load(); }

    static ModelRequest classification_request(const PaperDoc& doc);
    static ModelRequest extraction_request(const PaperDoc& doc, const SchemaNode& node, const NodePath& path);
    /// `children` must already be filtered to the non-empty ones.
    static ModelRequest aggregation_request(const NodePath& parent, std::span<const ChildContent> children);

private:
    std::string call(const ModelRequest& request);
    std::string bounded(std::string content, std::string_view context);

    std::shared_ptr<Generator> generator_;
    std::shared_ptr<Embedder> embedder_;
    ContentModelOptions options_;
    std::atomic<size_t> generator_calls_{0};
    std::atomic<size_t> embed_calls_{0};
    mutable std::mutex warnings_mutex_;
    std::vector<std::string> warnings_;
};

// Reply parsing, exposed for tests.
std::optional<PaperType> parse_classification_reply(std::string_view reply);
std::string parse_extraction_reply(std::string_view reply, std::string_view field);
std::string parse_aggregation_reply(std::string_view reply);
/// Body of the first ```json fence, or the trimmed reply when there is none.
std::string_view strip_code_fence(std::string_view reply);

}  // namespace registerdex
