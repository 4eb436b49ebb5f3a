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

#include "registerdex/register_builder.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "registerdex/error.hpp"
#include "registerdex/text.hpp"

namespace registerdex {

using nlohmann::json;
using nlohmann::ordered_json;

const std::string& HierarchicalRegister::at(const NodePath& path) const {
    const auto it = contents.find(path);
    if (it == contents.end()) {
        throw std::out_of_range("register " + paper_id + " has no node " + path.str());
    }
    return it->second;
}

ordered_json to_json(const HierarchicalRegister& reg) {
    ordered_json out;
    out["paper_id"] = reg.paper_id;
    out["paper_type"] = std::string(to_string(reg.paper_type));
    out["schema_version"] = reg.schema_version;
    ordered_json contents = ordered_json::object();
    for (const auto& [path, content] : reg.contents) {
        contents[path.str()] = content;
    }
    out["contents"] = std::move(contents);
    return out;
}

HierarchicalRegister register_from_json(const json& record) {
    HierarchicalRegister reg;
    try {
        reg.paper_id = record.at("paper_id").get<std::string>();
        const std::string type = record.at("paper_type").get<std::string>();
        const auto parsed = parse_paper_type(type);
        if (!parsed) {
            throw DataError("unknown paper_type '" + type + "'");
        }
        reg.paper_type = *parsed;
        reg.schema_version = record.value("schema_version", std::string{});
        for (const auto& [key, value] : record.at("contents").items()) {
            reg.contents.emplace(NodePath::parse(key), value.get<std::string>());
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("bad register record: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("bad register record: ") + e.what());
    }
    return reg;
}

std::string serialize_register(const HierarchicalRegister& reg) {
    return to_json(reg).dump();
}

void check_register(const HierarchicalRegister& reg, const RegisterSchema& schema) {
    if (reg.paper_type != schema.paper_type()) {
        throw BuildError("register " + reg.paper_id + " is typed " + std::string(to_string(reg.paper_type)) +
                         " but checked against the " + std::string(to_string(schema.paper_type())) + " schema");
    }
    const auto paths = all_paths(schema);
    for (const auto& path : paths) {
        if (!reg.contents.contains(path)) {
            throw BuildError("register " + reg.paper_id + " misses node " + path.str());
        }
    }
    if (reg.contents.size() != paths.size()) {
        for (const auto& [path, content] : reg.contents) {
            if (!validate_path(schema, path)) {
                throw BuildError("register " + reg.paper_id + " has node " + path.str() + " outside its schema");
            }
        }
    }
}

namespace {

template <typename Fn>
std::string with_retries(ContentModel& model, const BuildOptions& options, const std::string& where, Fn&& fn) {
    const int attempts = 1 + std::max(0, options.node_retries);
    for (int attempt = 1;; ++attempt) {
        try {
            return fn();
        } catch (const ModelError& e) {
            if (attempt < attempts) {
                spdlog::debug("{}: attempt {} failed: {}", where, attempt, e.what());
                continue;
            }
            if (options.on_extract_error == OnExtractError::Blank) {
                model.warn(where + ": left blank after " + std::to_string(attempts) + " attempts: " + e.what());
                return {};
            }
            throw BuildError(where + ": " + e.what());
        }
    }
}

// Paragraph of the source text sharing the most distinct words with `content`.
std::string best_paragraph(const std::vector<std::string>& paragraphs, std::string_view content) {
    const TokenizerOptions options{.remove_stopwords = true};
    std::set<std::string> wanted;
    for (auto& t : tokenize(content, options)) {
        wanted.insert(std::move(t));
    }
    size_t best_overlap = 0;
    const std::string* best = nullptr;
    for (const auto& paragraph : paragraphs) {
        std::set<std::string> seen;
        for (auto& t : tokenize(paragraph, options)) {
            if (wanted.contains(t)) {
                seen.insert(std::move(t));
            }
        }
        if (seen.size() > best_overlap) {
            best_overlap = seen.size();
            best = &paragraph;
        }
    }
    return best == nullptr ? std::string{} : *best;
}

}  // namespace

HierarchicalRegister build_register(const PaperDoc& doc, const SchemaSet& schemas, ContentModel& model,
                                    const BuildOptions& options) {
    HierarchicalRegister reg;
    reg.paper_id = doc.id;
    reg.paper_type = model.classify_paper_type(doc);
    const RegisterSchema& schema = schemas.at(reg.paper_type);
    reg.schema_version = schema.version();

    const auto paths = all_paths(schema);
    std::vector<NodePath> internal;
    for (const auto& path : paths) {
        reg.contents.emplace(path, std::string{});
        const SchemaNode* node = schema.find(path);
        if (node->is_leaf()) {
            const std::string where = "paper " + doc.id + " node " + path.str();
            reg.contents[path] =
                with_retries(model, options, where, [&] { return model.extract_leaf_content(doc, *node, path); });
        } else {
            internal.push_back(path);
        }
    }

    // Children before parents: deepest internal nodes first.
    std::stable_sort(internal.begin(), internal.end(),
                     [](const NodePath& a, const NodePath& b) { return a.depth() > b.depth(); });
    for (const auto& path : internal) {
        const SchemaNode* node = schema.find(path);
        std::vector<ChildContent> children;
        children.reserve(node->children.size());
        for (const auto& child : node->children) {
            children.push_back({child.name, child.description, reg.contents.at(path.child(child.name))});
        }
        const std::string where = "paper " + doc.id + " node " + path.str();
        reg.contents[path] =
            with_retries(model, options, where, [&] { return model.aggregate_contents(path, children); });
    }

    if (options.enrich && !doc.full_text.empty()) {
        const auto paragraphs = split_paragraphs(doc.full_text);
        for (auto& [path, content] : reg.contents) {
            if (trim(content).empty()) {
                continue;
            }
            const std::string extra = best_paragraph(paragraphs, content);
            if (!extra.empty() && content.find(extra) == std::string::npos) {
                content += "\n\n" + extra;
            }
        }
    }
    return reg;
}

namespace {

std::string describe_failures(const std::vector<BuildFailure>& failures) {
    std::string message = std::to_string(failures.size()) + " paper(s) failed to build:";
    for (const auto& f : failures) {
        message += "\n  " + f.paper_id + ": " + f.message;
    }
    return message;
}

}  // namespace

CorpusBuildError::CorpusBuildError(std::vector<BuildFailure> failures)
    : BuildError(describe_failures(failures)), failures_(std::move(failures)) {}

std::vector<HierarchicalRegister> build_corpus_registers(std::span<const PaperDoc> corpus, const SchemaSet& schemas,
                                                         ContentModel& model, const BuildOptions& options,
                                                         const std::vector<HierarchicalRegister>* cache,
                                                         const RegisterSink& sink) {
    std::unordered_map<std::string, const HierarchicalRegister*> cached;
    if (cache != nullptr) {
        for (const auto& reg : *cache) {
            cached.emplace(reg.paper_id, &reg);
        }
    }
    const auto reusable = [&](const PaperDoc& doc) -> const HierarchicalRegister* {
        const auto it = cached.find(doc.id);
        if (it == cached.end()) {
            return nullptr;
        }
        const HierarchicalRegister& reg = *it->second;
        if (!schemas.contains(reg.paper_type) || schemas.at(reg.paper_type).version() != reg.schema_version) {
            return nullptr;
        }
        if (doc.declared_type && *doc.declared_type != reg.paper_type) {
            return nullptr;
        }
        return &reg;
    };

    std::vector<std::optional<HierarchicalRegister>> results(corpus.size());
    std::vector<std::optional<std::string>> errors(corpus.size());
    std::atomic<size_t> next{0};
    std::mutex sink_mutex;

    const auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < corpus.size(); i = next.fetch_add(1)) {
            const PaperDoc& doc = corpus[i];
            try {
                if (const auto* hit = reusable(doc)) {
                    results[i] = *hit;
                } else {
                    results[i] = build_register(doc, schemas, model, options);
                    if (sink) {
                        std::lock_guard lock(sink_mutex);
                        sink(*results[i]);
                    }
                }
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };

    const size_t threads = std::clamp<size_t>(options.parallel_papers, 1, std::max<size_t>(1, corpus.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }

    std::vector<BuildFailure> failures;
    std::vector<HierarchicalRegister> registers;
    registers.reserve(corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i) {
        if (errors[i]) {
            failures.push_back({corpus[i].id, *errors[i]});
        } else {
            registers.push_back(std::move(*results[i]));
        }
    }
    if (!failures.empty()) {
        throw CorpusBuildError(std::move(failures));
    }
    return registers;
}

std::vector<HierarchicalRegister> load_register_store(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw DataError("cannot open register store " + file.string());
    }
    std::vector<HierarchicalRegister> registers;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        try {
            registers.push_back(register_from_json(json::parse(line)));
        } catch (const json::parse_error& e) {
            throw DataError(file.string() + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
        } catch (const DataError& e) {
            throw DataError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return registers;
}

void write_register_store(const std::filesystem::path& file, std::vector<HierarchicalRegister> registers) {
    std::sort(registers.begin(), registers.end(),
              [](const auto& a, const auto& b) { return a.paper_id < b.paper_id; });
    std::filesystem::path tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw DataError("cannot write register store " + file.string());
        }
        for (const auto& reg : registers) {
            out << serialize_register(reg) << '\n';
        }
    }
    std::filesystem::rename(tmp, file);
}

}  // namespace registerdex
