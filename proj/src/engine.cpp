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

#include "registerdex/engine.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fstream>
#include <mutex>
#include <set>

#include <spdlog/spdlog.h>

#include "registerdex/error.hpp"
#include "registerdex/hashing.hpp"

namespace registerdex {

using nlohmann::json;
using nlohmann::ordered_json;

SchemaSet schemas_for(const ServiceConfig& config) {
    if (config.schema_dir.empty()) {
        return default_schemas();
    }
    return load_schema_dir(config.schema_dir);
}

namespace {

RemoteEndpoint endpoint_from_env(const std::string& prefix, const std::string& model) {
    auto endpoint = RemoteEndpoint::from_env(prefix);
    if (!endpoint) {
        throw ConfigError(prefix + "_URL is not set");
    }
    endpoint->model = model;
    return *endpoint;
}

}  // namespace

std::shared_ptr<ContentModel> make_content_model(const ServiceConfig& config,
                                                 std::shared_ptr<HttpTransport> transport) {
    if (!transport) {
        transport = std::make_shared<HttplibTransport>();
    }
    const RetryPolicy policy = config.retry_policy();

    std::shared_ptr<const TranscriptStore> store;
    std::shared_ptr<TranscriptWriter> writer;
    const bool replaying = config.model_backend == "replay" || config.embedder == "replay";
    const bool recording = config.model_backend == "record" || config.embedder == "record";
    if (replaying && !config.transcripts.empty()) {
        if (!std::filesystem::exists(config.transcripts)) {
            throw ConfigError("transcript file " + config.transcripts.string() + " does not exist");
        }
        store = std::make_shared<const TranscriptStore>(TranscriptStore::load(config.transcripts));
    }
    if (recording) {
        if (config.transcripts.empty()) {
            throw ConfigError("record mode needs a transcripts path");
        }
        writer = std::make_shared<TranscriptWriter>(config.transcripts);
    }

    std::shared_ptr<Generator> generator;
    if (config.model_backend == "replay") {
        // Without transcripts, model-backed operations fail on first use
        // rather than at startup; search over a built index never needs them.
        if (store) {
            generator = std::make_shared<ReplayGenerator>(store);
        }
    } else if (config.model_backend == "extractive") {
        generator = std::make_shared<ExtractiveGenerator>();
    } else {
        generator = std::make_shared<RemoteGenerator>(endpoint_from_env("REGISTERDEX_LLM", config.llm_model),
                                                      transport, policy);
        if (config.model_backend == "record") {
            generator = std::make_shared<RecordingGenerator>(generator, writer);
        }
    }

    std::shared_ptr<Embedder> embedder;
    if (config.embedder == "fixture") {
        embedder = std::make_shared<FixtureEmbedder>(config.embedding_dim);
    } else if (config.embedder == "replay") {
        if (store) {
            embedder = std::make_shared<ReplayEmbedder>(store, config.embedding_dim);
        }
    } else {
        embedder = std::make_shared<RemoteEmbedder>(endpoint_from_env("REGISTERDEX_EMB", config.embedding_model),
                                                    config.embedding_dim, transport, policy);
        if (config.embedder == "record") {
            embedder = std::make_shared<RecordingEmbedder>(embedder, writer);
        }
    }
    ContentModelOptions options;
    options.max_content_bytes = config.max_content_bytes;
    return std::make_shared<ContentModel>(std::move(generator), std::move(embedder), options);
}

// ---------------------------------------------------------------------------
// Engine

std::shared_ptr<Engine> Engine::open(const ServiceConfig& config, std::shared_ptr<HttpTransport> transport) {
    config.validate();
    if (!transport) {
        transport = std::make_shared<HttplibTransport>();
    }
    std::shared_ptr<Engine> engine(new Engine());
    engine->config_ = config;
    engine->schemas_ = schemas_for(config);
    engine->catalog_ = std::make_unique<ViewCatalog>(engine->schemas_);
    engine->tree_ = std::make_unique<IndexTree>(load_index(config.index_dir));
    engine->model_ = make_content_model(config, transport);
    if (config.recognizer == "remote") {
        engine->recognizer_ = std::make_unique<RemoteRecognizer>(config.recognizer_url, transport, *engine->catalog_,
                                                                 config.recognizer_fallback, config.retry_policy());
    } else {
        engine->recognizer_ = std::make_unique<LexicalRecognizer>(*engine->catalog_);
    }
    if (!config.corpus.empty()) {
        if (!std::filesystem::exists(config.corpus)) {
            throw ConfigError("corpus file " + config.corpus.string() + " does not exist");
        }
        for (auto& doc : load_corpus(config.corpus)) {
            std::string id = doc.id;
            engine->papers_.emplace(std::move(id), std::move(doc));
        }
    }
    if (std::filesystem::exists(config.register_store)) {
        for (auto& reg : load_register_store(config.register_store)) {
            std::string id = reg.paper_id;
            engine->registers_.emplace(std::move(id), std::move(reg));
        }
    }
    return engine;
}

const PaperDoc* Engine::paper(std::string_view id) const {
    const auto it = papers_.find(id);
    return it == papers_.end() ? nullptr : &it->second;
}

const HierarchicalRegister* Engine::paper_register(std::string_view id) const {
    const auto it = registers_.find(id);
    return it == registers_.end() ? nullptr : &it->second;
}

SearchResult Engine::search(std::string_view query, std::optional<size_t> k, std::optional<size_t> m,
                            const std::vector<std::string>& views) const {
    SearchOptions options;
    options.k = k.value_or(config_.k);
    options.m = m.value_or(config_.m);
    options.kind = tree_->kind();
    options.fusion.normalize = config_.normalize;
    SearchResult result;
    if (!views.empty()) {
        std::vector<View> chosen;
        for (const auto& joined : views) {
            auto view = catalog_->resolve(joined);
            if (!view) {
                throw std::invalid_argument("unknown view '" + joined + "'");
            }
            chosen.push_back(*view);
        }
        result = search_with_views(query, *tree_, chosen, options, model_.get());
    } else {
        result = registerdex::search(query, *tree_, *recognizer_, *catalog_, options, model_.get());
    }
    spdlog::info("search views={} hits={} identify_us={} lookup_us={} fuse_us={}", result.views_used.views.size(),
                 result.ranked.size(), result.timings.identify.count(), result.timings.lookup.count(),
                 result.timings.fuse.count());
    return result;
}

RecognizerOutput Engine::identify(std::string_view query, std::optional<size_t> k) const {
    return registerdex::identify(query, k.value_or(config_.k), *recognizer_, *catalog_);
}

// ---------------------------------------------------------------------------
// Commands

DirectoryLock::DirectoryLock(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto file = dir / ".lock";
    fd_ = ::open(file.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0) {
        throw Error("cannot open lock file " + file.string());
    }
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw Error("directory " + dir.string() + " is locked by another build");
    }
}

DirectoryLock::~DirectoryLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

namespace {

std::filesystem::path parent_or_cwd(const std::filesystem::path& file) {
    const auto parent = file.parent_path();
    return parent.empty() ? std::filesystem::path(".") : parent;
}

std::string paper_digest(const PaperDoc& doc) {
    return sha256_hex(to_json(doc).dump());
}

// Partial store lines: {"paper_sha256", "register"}. A torn last line from an
// interrupted run is ignored.
std::map<std::string, HierarchicalRegister> load_partial(const std::filesystem::path& file) {
    std::map<std::string, HierarchicalRegister> out;
    std::ifstream in(file);
    std::string line;
    while (std::getline(in, line)) {
        try {
            const json record = json::parse(line);
            out.insert_or_assign(record.at("paper_sha256").get<std::string>(),
                                 register_from_json(record.at("register")));
        } catch (const std::exception&) {
            continue;
        }
    }
    return out;
}

}  // namespace

BuildRegistersSummary cmd_build_registers(const ServiceConfig& config, std::shared_ptr<HttpTransport> transport) {
    config.validate();
    if (config.corpus.empty()) {
        throw ConfigError("build-registers needs a corpus file");
    }
    const auto docs = load_corpus(config.corpus);
    DirectoryLock lock(parent_or_cwd(config.register_store));
    const SchemaSet schemas = schemas_for(config);
    auto model = make_content_model(config, std::move(transport));

    std::filesystem::path partial = config.register_store;
    partial += ".partial";
    const auto previous = load_partial(partial);
    std::vector<HierarchicalRegister> cache;
    std::map<std::string, std::string> digests;
    for (const auto& doc : docs) {
        const std::string digest = paper_digest(doc);
        digests.emplace(doc.id, digest);
        if (const auto it = previous.find(digest); it != previous.end() && it->second.paper_id == doc.id) {
            cache.push_back(it->second);
        }
    }
    {
        // Rewrite the partial file with only the still-valid entries.
        std::ofstream out(partial, std::ios::trunc);
        for (const auto& reg : cache) {
            out << ordered_json{{"paper_sha256", digests.at(reg.paper_id)}, {"register", to_json(reg)}}.dump()
                << '\n';
        }
    }
    std::ofstream partial_out(partial, std::ios::app);
    const RegisterSink sink = [&](const HierarchicalRegister& reg) {
        partial_out << ordered_json{{"paper_sha256", digests.at(reg.paper_id)}, {"register", to_json(reg)}}.dump()
                    << '\n';
        partial_out.flush();
    };

    auto registers = build_corpus_registers(docs, schemas, *model, config.build_options(), &cache, sink);
    for (const auto& reg : registers) {
        check_register(reg, schemas.at(reg.paper_type));
    }
    write_register_store(config.register_store, std::move(registers));
    partial_out.close();
    std::filesystem::remove(partial);

    BuildRegistersSummary summary;
    summary.papers = docs.size();
    summary.reused = cache.size();
    summary.built = docs.size() - cache.size();
    summary.generator_calls = model->generator_calls();
    summary.warnings = model->warnings();
    return summary;
}

BuildIndexSummary cmd_build_index(const ServiceConfig& config, std::shared_ptr<HttpTransport> transport) {
    config.validate();
    if (!std::filesystem::exists(config.register_store)) {
        throw IndexError("register store " + config.register_store.string() +
                         " does not exist; run build-registers first");
    }
    const auto registers = load_register_store(config.register_store);
    DirectoryLock lock(config.index_dir);
    std::shared_ptr<ContentModel> model;
    if (config.index_kind == IndexKind::Dense) {
        model = make_content_model(config, std::move(transport));
    }
    const IndexTree tree = build_index_tree(registers, config.index_kind, model.get(), config.index_options());
    BuildIndexSummary summary;
    summary.registers = registers.size();
    for (const auto& [path, view] : tree.views()) {
        summary.doc_counts.emplace(path.str(), view.doc_count());
    }
    summary.manifest_sha256 = save_index(tree, config.index_dir);
    return summary;
}

SearchResult cmd_search(const ServiceConfig& config, std::string_view query, const std::vector<std::string>& views) {
    return Engine::open(config)->search(query, std::nullopt, std::nullopt, views);
}

RecognizerOutput cmd_identify(const ServiceConfig& config, std::string_view query) {
    return Engine::open(config)->identify(query);
}

BenchReport cmd_eval(const ServiceConfig& config, const std::vector<std::string>& systems,
                     const std::filesystem::path& dataset, const std::filesystem::path& out_dir,
                     std::shared_ptr<HttpTransport> transport) {
    config.validate();
    if (!transport) {
        transport = std::make_shared<HttplibTransport>();
    }
    std::vector<PaperDoc> corpus;
    if (!config.corpus.empty()) {
        corpus = load_corpus(config.corpus);
    }
    std::optional<IndexTree> tree;
    try {
        tree.emplace(load_index(config.index_dir));
    } catch (const Error& e) {
        spdlog::warn("register systems unavailable: {}", e.what());
    }

    std::vector<std::string> known_ids;
    if (!corpus.empty()) {
        for (const auto& doc : corpus) {
            known_ids.push_back(doc.id);
        }
    } else if (tree) {
        known_ids = tree->corpus_ids();
    }
    const auto queries = load_eval_queries(dataset, known_ids.empty() ? nullptr : &known_ids);

    const SchemaSet schemas = schemas_for(config);
    const ViewCatalog catalog(schemas);
    auto model = make_content_model(config, transport);

    std::vector<std::string> names = systems;
    if (names.empty()) {
        names = {"register", "title", "abstract", "full_text", "chunk512:avg", "chunk512:max", "paragraph:avg",
                 "paragraph:max"};
    }
    std::vector<SystemSpec> specs;
    for (const auto& name : names) {
        SystemSpec spec = SystemSpec::parse(name);
        spec.k = config.k;
        spec.normalize = config.normalize;
        specs.push_back(std::move(spec));
    }

    BenchContext ctx;
    ctx.tree = tree ? &*tree : nullptr;
    ctx.corpus = corpus;
    ctx.catalog = &catalog;
    ctx.model = model.get();
    ctx.kind = tree ? tree->kind() : config.index_kind;
    ctx.seed = config.seed;
    ctx.parallel_queries = config.parallel_queries;
    ctx.remote_recognizer_url = config.recognizer_url;
    ctx.transport = transport;
    ctx.config = config.to_json();

    BenchReport report = run_benchmark(queries, specs, ctx, dataset.stem().string());
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream(out_dir / "report.json", std::ios::trunc) << report.to_json().dump(2) << '\n';
        std::ofstream(out_dir / "report.txt", std::ios::trunc) << report.to_table();
        ordered_json timings = ordered_json::object();
        for (const auto& s : report.systems) {
            timings[s.name] = {{"mean_latency_ms", s.mean_latency_ms}};
        }
        std::ofstream(out_dir / "timings.json", std::ios::trunc) << timings.dump(2) << '\n';
    }
    return report;
}

}  // namespace registerdex
