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

#include "registerdex/content_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "registerdex/error.hpp"
#include "registerdex/hashing.hpp"
#include "registerdex/resources.hpp"
#include "registerdex/text.hpp"

namespace registerdex {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Corpus records

ordered_json to_json(const PaperDoc& doc) {
    ordered_json out;
    out["id"] = doc.id;
    out["title"] = doc.title;
    out["abstract"] = doc.abstract;
    out["full_text"] = doc.full_text;
    if (doc.declared_type) {
        out["type"] = std::string(to_string(*doc.declared_type));
    }
    return out;
}

PaperDoc paper_from_json(const json& record) {
    if (!record.is_object()) {
        throw DataError("paper record is not an object");
    }
    const auto text_field = [&](const char* name, bool required) -> std::string {
        const auto it = record.find(name);
        if (it == record.end() || it->is_null()) {
            if (required) {
                throw DataError(std::string("missing \"") + name + "\"");
            }
            return {};
        }
        if (!it->is_string()) {
            throw DataError(std::string("\"") + name + "\" is not a string");
        }
        return it->get<std::string>();
    };
    PaperDoc doc;
    doc.id = text_field("id", true);
    doc.title = text_field("title", true);
    doc.abstract = text_field("abstract", true);
    doc.full_text = text_field("full_text", false);
    if (doc.id.empty()) {
        throw DataError("empty \"id\"");
    }
    if (trim(doc.title).empty() || trim(doc.abstract).empty()) {
        throw DataError("paper " + doc.id + ": title and abstract must be non-empty");
    }
    if (const std::string type = text_field("type", false); !type.empty()) {
        doc.declared_type = parse_paper_type(type);
        if (!doc.declared_type) {
            throw DataError("paper " + doc.id + ": unknown type '" + type + "'");
        }
    }
    return doc;
}

std::vector<PaperDoc> load_corpus(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw DataError("cannot open corpus file " + file.string());
    }
    std::vector<PaperDoc> docs;
    std::set<std::string> ids;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        try {
            PaperDoc doc = paper_from_json(json::parse(line));
            if (!ids.insert(doc.id).second) {
                throw DataError("duplicate paper id '" + doc.id + "'");
            }
            docs.push_back(std::move(doc));
        } catch (const json::parse_error& e) {
            throw DataError(file.string() + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
        } catch (const DataError& e) {
            throw DataError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return docs;
}

void write_corpus(const std::filesystem::path& file, std::span<const PaperDoc> docs) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) {
        throw DataError("cannot write corpus file " + file.string());
    }
    for (const auto& doc : docs) {
        out << to_json(doc).dump() << '\n';
    }
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("cosine of vectors with different dimensions");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---------------------------------------------------------------------------
// Transcripts

std::string request_key(std::string_view operation, std::string_view prompt) {
    std::string material;
    material.reserve(operation.size() + prompt.size() + 1);
    material.append(operation);
    material.push_back('\n');
    material.append(prompt);
    return sha256_hex(material);
}

TranscriptStore TranscriptStore::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw DataError("cannot open transcript file " + file.string());
    }
    TranscriptStore store;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        // A recording run that died mid-write leaves an unterminated last line.
        const bool terminated = !in.eof();
        try {
            const json record = json::parse(line);
            store.add({record.at("request_key").get<std::string>(), record.value("operation", std::string{}),
                       record.at("response").get<std::string>()});
        } catch (const json::exception& e) {
            if (!terminated) {
                spdlog::warn("{}:{}: ignoring torn final transcript record", file.string(), line_no);
                break;
            }
            throw DataError(file.string() + ":" + std::to_string(line_no) + ": bad transcript record: " + e.what());
        }
    }
    return store;
}

void TranscriptStore::add(ModelTranscript transcript) {
    std::string key = transcript.request_key;
    entries_.insert_or_assign(std::move(key), std::move(transcript));
}

std::optional<std::string> TranscriptStore::find(std::string_view key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second.response;
}

namespace {

std::string transcript_line(const ModelTranscript& t) {
    ordered_json record;
    record["request_key"] = t.request_key;
    record["operation"] = t.operation;
    record["response"] = t.response;
    return record.dump();
}

}  // namespace

TranscriptWriter::TranscriptWriter(std::filesystem::path file) : file_(std::move(file)) {
    if (std::filesystem::exists(file_)) {
        std::ifstream in(file_);
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) {
                continue;
            }
            try {
                written_[json::parse(line).at("request_key").get<std::string>()] = true;
            } catch (const json::exception&) {
                // A torn last line from an interrupted run; the request is re-recorded.
            }
        }
    }
}

void TranscriptWriter::append(const ModelTranscript& transcript) {
    std::lock_guard lock(mutex_);
    if (written_.contains(transcript.request_key)) {
        return;
    }
    std::ofstream out(file_, std::ios::app);
    if (!out) {
        throw DataError("cannot append to transcript file " + file_.string());
    }
    out << transcript_line(transcript) << '\n';
    out.flush();
    written_[transcript.request_key] = true;
}

void write_transcripts(const std::filesystem::path& file, std::span<const ModelTranscript> transcripts) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) {
        throw DataError("cannot write transcript file " + file.string());
    }
    for (const auto& t : transcripts) {
        out << transcript_line(t) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Generators

RemoteGenerator::RemoteGenerator(RemoteEndpoint endpoint, std::shared_ptr<HttpTransport> transport, RetryPolicy policy)
    : endpoint_(std::move(endpoint)),
      transport_(std::move(transport)),
      policy_(policy),
      limiter_(policy.max_in_flight) {}

std::string RemoteGenerator::complete(const ModelRequest& request) {
    ordered_json body;
    body["model"] = endpoint_.model;
    body["messages"] = json::array({{{"role", "user"}, {"content", request.prompt}}});
    body["temperature"] = 0;
    HttpRequest http{endpoint_.url_for("/chat/completions"), endpoint_.headers(), body.dump(), policy_.timeout};
    HttpResponse response;
    {
        auto permit = limiter_.acquire();
        response = post_with_retry(*transport_, std::move(http), policy_);
    }
    try {
        const json reply = json::parse(response.body);
        const auto& content = reply.at("choices").at(0).at("message").at("content");
        return content.is_null() ? std::string{} : content.get<std::string>();
    } catch (const json::exception& e) {
        throw ModelError(std::string("unexpected chat-completions reply: ") + e.what());
    }
}

ReplayGenerator::ReplayGenerator(std::shared_ptr<const TranscriptStore> store) : store_(std::move(store)) {}

std::string ReplayGenerator::complete(const ModelRequest& request) {
    if (auto response = store_->find(request.key)) {
        return *response;
    }
    throw ModelError("no transcript for " + request.operation + " request " + request.key);
}

RecordingGenerator::RecordingGenerator(std::shared_ptr<Generator> inner, std::shared_ptr<TranscriptWriter> writer)
    : inner_(std::move(inner)), writer_(std::move(writer)) {}

std::string RecordingGenerator::complete(const ModelRequest& request) {
    std::string response = inner_->complete(request);
    writer_->append({request.key, request.operation, response});
    return response;
}

namespace {

std::string fenced(const ordered_json& body) {
    return "```json\n" + body.dump(2) + "\n```";
}

std::string classify_by_keywords(std::string_view abstract) {
    const auto tokens = tokenize(abstract);
    const auto count = [&](std::initializer_list<std::string_view> cues) {
        size_t n = 0;
        for (const auto& token : tokens) {
            for (const auto cue : cues) {
                if (token.rfind(cue, 0) == 0) {
                    ++n;
                }
            }
        }
        return n;
    };
    const std::pair<size_t, PaperType> votes[] = {
        {count({"benchmark"}), PaperType::BenchmarkConstruction},
        {count({"survey", "review"}), PaperType::Survey},
        {count({"theorem", "prove", "proof", "bound"}), PaperType::TheoryProof},
        {count({"investigat", "mechanism", "understand", "analyz"}), PaperType::MechanismExploration},
    };
    size_t best = 0;
    PaperType type = PaperType::AlgorithmInnovation;
    for (const auto& [n, candidate] : votes) {
        if (n > best) {
            best = n;
            type = candidate;
        }
    }
    return std::string(display_label(type));
}

std::string extract_sentences(const json& inputs, size_t max_sentences) {
    TokenizerOptions options{.remove_stopwords = true};
    std::set<std::string> cue;
    for (auto& t : tokenize(split_camel_case(inputs.at("name").get<std::string>()) + " " +
                                inputs.value("description", std::string{}),
                            options)) {
        cue.insert(std::move(t));
    }
    const std::string text = inputs.value("full_text", std::string{});
    const auto sentences = split_sentences(text.empty() ? inputs.value("abstract", std::string{}) : text);
    std::vector<std::pair<size_t, size_t>> scored;  // (overlap, position)
    for (size_t i = 0; i < sentences.size(); ++i) {
        std::set<std::string> seen;
        for (auto& t : tokenize(sentences[i], options)) {
            if (cue.contains(t)) {
                seen.insert(std::move(t));
            }
        }
        if (seen.size() >= 2) {
            scored.emplace_back(seen.size(), i);
        }
    }
    std::stable_sort(scored.begin(), scored.end(), [](auto& a, auto& b) { return a.first > b.first; });
    if (scored.size() > max_sentences) {
        scored.resize(max_sentences);
    }
    std::sort(scored.begin(), scored.end(), [](auto& a, auto& b) { return a.second < b.second; });
    std::vector<std::string> picked;
    for (const auto& [overlap, position] : scored) {
        picked.push_back(sentences[position]);
    }
    return join(picked, " ");
}

std::string summarize_children(const json& children) {
    std::vector<std::string> leads;
    size_t shortest = std::string::npos;
    for (const auto& child : children) {
        const std::string value = child.value("node_value", std::string{});
        if (trim(value).empty()) {
            continue;
        }
        shortest = std::min(shortest, value.size());
        const auto sentences = split_sentences(value);
        if (!sentences.empty()) {
            leads.push_back(sentences.front());
        }
    }
    std::string summary = join(leads, " ");
    if (shortest != std::string::npos && summary.size() > shortest) {
        std::string_view cut = utf8_truncate(summary, shortest);
        if (const auto space = cut.rfind(' '); space != std::string_view::npos && space > 0) {
            cut = cut.substr(0, space);
        }
        summary = std::string(cut);
    }
    return summary;
}

}  // namespace

std::string ExtractiveGenerator::complete(const ModelRequest& request) {
    const json& inputs = request.inputs;
    if (request.operation == "classify") {
        return classify_by_keywords(inputs.value("abstract", std::string{}));
    }
    if (request.operation == "extract") {
        ordered_json body;
        body[inputs.at("name").get<std::string>()] = extract_sentences(inputs, max_sentences_);
        return fenced(body);
    }
    if (request.operation == "aggregate") {
        ordered_json body;
        body["root_name"] = inputs.at("root_name");
        body["root_value"] = summarize_children(inputs.at("children"));
        return fenced(body);
    }
    throw ModelError("extractive backend cannot serve operation '" + request.operation + "'");
}

// ---------------------------------------------------------------------------
// Embedders

FixtureEmbedder::FixtureEmbedder(size_t dimension, std::uint64_t seed) : dimension_(dimension), seed_(seed) {
    if (dimension_ == 0) {
        throw std::invalid_argument("embedding dimension must be positive");
    }
}

EmbeddingVector FixtureEmbedder::embed(std::string_view text) {
    const std::string_view trimmed = trim(text);
    if (trimmed.empty()) {
        throw std::invalid_argument("cannot embed empty text");
    }
    auto tokens = tokenize(trimmed);
    if (tokens.empty()) {
        tokens.emplace_back(trimmed);
    }
    EmbeddingVector out;
    out.values.assign(dimension_, 0.0);
    for (const auto& token : tokens) {
        std::uint64_t state = fnv1a64(token) ^ seed_;
        for (auto& v : out.values) {
            const std::uint64_t bits = splitmix64(state);
            v += static_cast<double>(bits >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        }
    }
    double norm = 0.0;
    for (double v : out.values) {
        norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (auto& v : out.values) {
            v /= norm;
        }
    }
    return out;
}

namespace {

EmbeddingVector parse_vector(const json& array, size_t dimension, std::string_view source) {
    if (!array.is_array()) {
        throw ModelError(std::string(source) + ": embedding is not an array");
    }
    EmbeddingVector out;
    out.values.reserve(array.size());
    for (const auto& v : array) {
        const double value = v.get<double>();
        if (!std::isfinite(value)) {
            throw ModelError(std::string(source) + ": non-finite embedding entry");
        }
        out.values.push_back(value);
    }
    if (out.dimension() != dimension) {
        throw ModelError(std::string(source) + ": embedding dimension " + std::to_string(out.dimension()) +
                         " does not match configured " + std::to_string(dimension));
    }
    return out;
}

std::string dump_vector(const EmbeddingVector& v) {
    json array = json::array();
    for (double x : v.values) {
        array.push_back(x);
    }
    return array.dump();
}

}  // namespace

RemoteEmbedder::RemoteEmbedder(RemoteEndpoint endpoint, size_t dimension, std::shared_ptr<HttpTransport> transport,
                               RetryPolicy policy)
    : endpoint_(std::move(endpoint)),
      dimension_(dimension),
      transport_(std::move(transport)),
      policy_(policy),
      limiter_(policy.max_in_flight) {}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) {
    ordered_json body;
    body["model"] = endpoint_.model;
    body["input"] = std::string(text);
    HttpRequest http{endpoint_.url_for("/embeddings"), endpoint_.headers(), body.dump(), policy_.timeout};
    HttpResponse response;
    {
        auto permit = limiter_.acquire();
        response = post_with_retry(*transport_, std::move(http), policy_);
    }
    json reply;
    try {
        reply = json::parse(response.body);
        return parse_vector(reply.at("data").at(0).at("embedding"), dimension_, "embeddings endpoint");
    } catch (const json::exception& e) {
        throw ModelError(std::string("unexpected embeddings reply: ") + e.what());
    }
}

RecordingEmbedder::RecordingEmbedder(std::shared_ptr<Embedder> inner, std::shared_ptr<TranscriptWriter> writer)
    : inner_(std::move(inner)), writer_(std::move(writer)) {}

EmbeddingVector RecordingEmbedder::embed(std::string_view text) {
    EmbeddingVector v = inner_->embed(text);
    writer_->append({request_key("embed", text), "embed", dump_vector(v)});
    return v;
}

ReplayEmbedder::ReplayEmbedder(std::shared_ptr<const TranscriptStore> store, size_t dimension)
    : store_(std::move(store)), dimension_(dimension) {}

EmbeddingVector ReplayEmbedder::embed(std::string_view text) {
    const std::string key = request_key("embed", text);
    const auto response = store_->find(key);
    if (!response) {
        throw ModelError("no transcript for embed request " + key);
    }
    try {
        return parse_vector(json::parse(*response), dimension_, "embed transcript");
    } catch (const json::exception& e) {
        throw ModelError(std::string("bad embed transcript: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Reply parsing

std::string_view strip_code_fence(std::string_view reply) {
    const auto open = reply.find("```");
    if (open == std::string_view::npos) {
        return trim(reply);
    }
    auto body_start = reply.find('\n', open + 3);
    if (body_start == std::string_view::npos) {
        return trim(reply.substr(open + 3));
    }
    ++body_start;
    const auto close = reply.find("```", body_start);
    return trim(reply.substr(body_start, close == std::string_view::npos ? std::string_view::npos : close - body_start));
}

std::optional<PaperType> parse_classification_reply(std::string_view reply) {
    if (auto exact = parse_paper_type(reply)) {
        return exact;
    }
    // Tolerate wrappers such as "Category: Theory Proof" as long as exactly
    // one label occurs.
    std::string lowered;
    for (unsigned char c : reply) {
        lowered.push_back(static_cast<char>(std::tolower(c)));
    }
    std::optional<PaperType> found;
    for (PaperType type : kAllPaperTypes) {
        std::string label(display_label(type));
        std::transform(label.begin(), label.end(), label.begin(), [](unsigned char c) { return std::tolower(c); });
        const bool hit = lowered.find(label) != std::string::npos ||
                         (type == PaperType::Survey && lowered.find("survey") != std::string::npos);
        if (hit) {
            if (found && *found != type) {
                return std::nullopt;
            }
            found = type;
        }
    }
    return found;
}

namespace {

std::string value_text(const json& value) {
    if (value.is_null()) {
        return {};
    }
    if (value.is_string()) {
        return std::string(trim(value.get<std::string>()));
    }
    return value.dump();
}

}  // namespace

std::string parse_extraction_reply(std::string_view reply, std::string_view field) {
    const std::string_view body = strip_code_fence(reply);
    if (body.empty()) {
        return {};
    }
    json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded()) {
        return std::string(body);
    }
    if (parsed.is_object()) {
        if (const auto it = parsed.find(std::string(field)); it != parsed.end()) {
            return value_text(*it);
        }
        if (parsed.size() == 1) {
            return value_text(parsed.begin().value());
        }
        return {};
    }
    return value_text(parsed);
}

std::string parse_aggregation_reply(std::string_view reply) {
    const std::string_view body = strip_code_fence(reply);
    if (body.empty()) {
        return {};
    }
    json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded()) {
        return std::string(body);
    }
    if (parsed.is_object()) {
        if (const auto it = parsed.find("root_value"); it != parsed.end()) {
            return value_text(*it);
        }
        return {};
    }
    return value_text(parsed);
}

// ---------------------------------------------------------------------------
// ContentModel

namespace {

std::string render(std::string_view tmpl, std::initializer_list<std::pair<std::string_view, std::string_view>> vars) {
    std::string out(tmpl);
    for (const auto& [name, value] : vars) {
        const std::string placeholder = "{{" + std::string(name) + "}}";
        for (size_t pos = out.find(placeholder); pos != std::string::npos;
             pos = out.find(placeholder, pos + value.size())) {
            out.replace(pos, placeholder.size(), value);
        }
    }
    return out;
}

std::string paper_text(const PaperDoc& doc) {
    std::string text = "Title: " + doc.title + "\n\nAbstract: " + doc.abstract;
    if (!doc.full_text.empty()) {
        text += "\n\n" + doc.full_text;
    }
    return text;
}

}  // namespace

ModelRequest ContentModel::classification_request(const PaperDoc& doc) {
    ModelRequest request;
    request.operation = "classify";
    request.prompt = render(resources::prompt_classify(), {{"abstract", doc.abstract}});
    request.key = request_key(request.operation, request.prompt);
    request.inputs = {{"title", doc.title}, {"abstract", doc.abstract}};
    return request;
}

ModelRequest ContentModel::extraction_request(const PaperDoc& doc, const SchemaNode& node, const NodePath& path) {
    ordered_json schema;
    schema[node.name] = "";
    ModelRequest request;
    request.operation = "extract";
    request.prompt = render(resources::prompt_extract(), {{"schema", schema.dump(2)}, {"paper", paper_text(doc)}});
    request.key = request_key(request.operation, request.prompt);
    request.inputs = {{"path", path.str()},          {"name", node.name},       {"description", node.description},
                      {"title", doc.title},          {"abstract", doc.abstract}, {"full_text", doc.full_text}};
    return request;
}

ModelRequest ContentModel::aggregation_request(const NodePath& parent, std::span<const ChildContent> children) {
    ordered_json tree;
    tree["root_name"] = parent.empty() ? std::string{} : parent.back();
    tree["children"] = ordered_json::array();
    for (const auto& child : children) {
        ordered_json node;
        node["node_name"] = child.name;
        node["node_desc"] = child.description;
        node["node_value"] = child.content;
        tree["children"].push_back(std::move(node));
    }
    tree["root_value"] = "";
    ModelRequest request;
    request.operation = "aggregate";
    request.prompt = render(resources::prompt_aggregate(), {{"tree", tree.dump(2)}});
    request.key = request_key(request.operation, request.prompt);
    request.inputs = tree;
    request.inputs["path"] = parent.str();
    return request;
}

ContentModel::ContentModel(std::shared_ptr<Generator> generator, std::shared_ptr<Embedder> embedder,
                           ContentModelOptions options)
    : generator_(std::move(generator)), embedder_(std::move(embedder)), options_(options) {}

void ContentModel::warn(std::string message) {
    spdlog::warn("{}", message);
    std::lock_guard lock(warnings_mutex_);
    warnings_.push_back(std::move(message));
}

std::vector<std::string> ContentModel::warnings() const {
    std::lock_guard lock(warnings_mutex_);
    return warnings_;
}

std::string ContentModel::call(const ModelRequest& request) {
    if (!generator_) {
        throw ModelError("no generative backend configured for " + request.operation);
    }
    generator_calls_.fetch_add(1);
    return generator_->complete(request);
}

std::string ContentModel::bounded(std::string content, std::string_view context) {
    if (content.size() > options_.max_content_bytes) {
        warn("content for " + std::string(context) + " truncated from " + std::to_string(content.size()) + " to " +
             std::to_string(options_.max_content_bytes) + " bytes");
        content = std::string(utf8_truncate(content, options_.max_content_bytes));
    }
    return content;
}

PaperType ContentModel::classify_paper_type(const PaperDoc& doc) {
    if (doc.declared_type) {
        return *doc.declared_type;
    }
    if (trim(doc.abstract).empty()) {
        throw DataError("paper " + doc.id + ": cannot classify without an abstract");
    }
    std::string reply;
    try {
        reply = call(classification_request(doc));
    } catch (const ModelError& e) {
        throw ModelError("classification failed for paper " + doc.id + ": " + e.what());
    }
    if (auto type = parse_classification_reply(reply)) {
        return *type;
    }
    warn("paper " + doc.id + ": unparseable classification reply '" + std::string(utf8_truncate(reply, 80)) +
         "', defaulting to AlgorithmInnovation");
    return PaperType::AlgorithmInnovation;
}

std::string ContentModel::extract_leaf_content(const PaperDoc& doc, const SchemaNode& node, const NodePath& path) {
    if (!node.is_leaf()) {
        throw std::invalid_argument("extract_leaf_content on internal node " + path.str());
    }
    std::string reply;
    try {
        reply = call(extraction_request(doc, node, path));
    } catch (const ModelError& e) {
        throw ModelError("extraction failed for paper " + doc.id + " at " + path.str() + ": " + e.what());
    }
    return bounded(parse_extraction_reply(reply, node.name), doc.id + " " + path.str());
}

std::string ContentModel::aggregate_contents(const NodePath& parent, std::span<const ChildContent> children) {
    if (children.empty()) {
        throw std::invalid_argument("aggregate_contents needs at least one child");
    }
    std::vector<ChildContent> present;
    for (const auto& child : children) {
        if (!trim(child.content).empty()) {
            present.push_back(child);
        }
    }
    if (present.empty()) {
        return {};
    }
    std::string reply;
    try {
        reply = call(aggregation_request(parent, present));
    } catch (const ModelError& e) {
        throw ModelError("aggregation failed at " + parent.str() + ": " + e.what());
    }
    return bounded(parse_aggregation_reply(reply), parent.str());
}

EmbeddingVector ContentModel::embed(std::string_view text) {
    if (!embedder_) {
        throw ModelError("no embedding backend configured");
    }
    if (trim(text).empty()) {
        throw std::invalid_argument("cannot embed empty text");
    }
    embed_calls_.fetch_add(1);
    EmbeddingVector v = embedder_->embed(text);
    if (v.dimension() != embedder_->dimension()) {
        throw ModelError("embedding dimension " + std::to_string(v.dimension()) + " does not match configured " +
                         std::to_string(embedder_->dimension()));
    }
    return v;
}

size_t ContentModel::embedding_dimension() const {
    return embedder_ ? embedder_->dimension() : 0;
}

}  // namespace registerdex
