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

#include "registerdex/index_tree.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "binary_io.hpp"
#include "registerdex/error.hpp"
#include "registerdex/hashing.hpp"

namespace registerdex {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(IndexKind kind) {
    return kind == IndexKind::Dense ? "dense" : "lexical";
}

IndexKind parse_index_kind(std::string_view text) {
    if (text == "lexical" || text == "bm25") {
        return IndexKind::Lexical;
    }
    if (text == "dense") {
        return IndexKind::Dense;
    }
    throw std::invalid_argument("unknown index kind '" + std::string(text) + "' (expected lexical or dense)");
}

ViewIndex::ViewIndex(NodePath view, LexicalIndex index) : view_(std::move(view)), index_(std::move(index)) {}
ViewIndex::ViewIndex(NodePath view, DenseIndex index) : view_(std::move(view)), index_(std::move(index)) {}

IndexKind ViewIndex::kind() const {
    return std::holds_alternative<DenseIndex>(index_) ? IndexKind::Dense : IndexKind::Lexical;
}

size_t ViewIndex::doc_count() const {
    return std::visit([](const auto& index) { return index.size(); }, index_);
}

const std::vector<std::string>& ViewIndex::ids() const {
    return std::visit([](const auto& index) -> const std::vector<std::string>& { return index.ids(); }, index_);
}

std::vector<double> ViewIndex::score(const Query& query) const {
    if (const auto* lexical = this->lexical()) {
        return lexical->score(query.tokens);
    }
    if (!query.embedding) {
        throw IndexError("dense view " + view_.str() + " scored without a query embedding");
    }
    return dense()->score(query.embedding->values);
}

namespace {

std::map<std::string, double> zip_scores(const std::vector<std::string>& ids, const std::vector<double>& scores) {
    std::map<std::string, double> out;
    for (size_t i = 0; i < ids.size(); ++i) {
        out.emplace(ids[i], scores[i]);
    }
    return out;
}

}  // namespace

std::map<std::string, double> lexical_scores(const ViewIndex& index, std::string_view query,
                                             const TokenizerOptions& tokenizer) {
    const auto* lexical = index.lexical();
    if (lexical == nullptr) {
        throw IndexError("view " + index.view().str() + " is not a lexical index");
    }
    return zip_scores(lexical->ids(), lexical->score(tokenize(query, tokenizer)));
}

std::map<std::string, double> dense_scores(const ViewIndex& index, const EmbeddingVector& query) {
    const auto* dense = index.dense();
    if (dense == nullptr) {
        throw IndexError("view " + index.view().str() + " is not a dense index");
    }
    return zip_scores(dense->ids(), dense->score(query.values));
}

IndexTree::IndexTree(IndexKind kind, IndexOptions options, std::map<PaperType, std::string> schema_versions,
                     std::vector<std::string> corpus_ids, std::map<NodePath, ViewIndex> views)
    : kind_(kind),
      options_(options),
      schema_versions_(std::move(schema_versions)),
      corpus_ids_(std::move(corpus_ids)),
      views_(std::move(views)) {}

const ViewIndex* IndexTree::find(const NodePath& view) const {
    const auto it = views_.find(view);
    return it == views_.end() ? nullptr : &it->second;
}

Query IndexTree::make_query(std::string_view text, ContentModel* model) const {
    Query query;
    query.text = std::string(text);
    query.tokens = tokenize(text, options_.tokenizer);
    if (kind_ == IndexKind::Dense) {
        if (model == nullptr) {
            throw IndexError("dense index needs an embedding backend to encode queries");
        }
        query.embedding = model->embed(text);
    }
    return query;
}

namespace {

template <typename Fn>
void parallel_for(size_t count, size_t workers, Fn&& fn) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<size_t> next{0};
    const auto run = [&] {
        for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    workers = std::clamp<size_t>(workers, 1, std::max<size_t>(1, count));
    if (workers == 1) {
        run();
    } else {
        std::vector<std::jthread> pool;
        for (size_t w = 0; w < workers; ++w) {
            pool.emplace_back(run);
        }
    }
    for (auto& error : errors) {
        if (error) {
            std::rethrow_exception(error);
        }
    }
}

}  // namespace

IndexTree build_index_tree(std::span<const HierarchicalRegister> registers, IndexKind kind, ContentModel* model,
                           const IndexOptions& options) {
    if (kind == IndexKind::Dense && model == nullptr) {
        throw IndexError("dense index needs an embedding backend");
    }
    std::vector<const HierarchicalRegister*> sorted;
    std::map<PaperType, std::string> versions;
    std::set<NodePath> view_set;
    for (const auto& reg : registers) {
        sorted.push_back(&reg);
        const auto [it, inserted] = versions.emplace(reg.paper_type, reg.schema_version);
        if (!inserted && it->second != reg.schema_version) {
            throw IndexError("registers of type " + std::string(to_string(reg.paper_type)) +
                             " mix schema versions '" + it->second + "' and '" + reg.schema_version + "'");
        }
        for (const auto& [path, content] : reg.contents) {
            view_set.insert(path);
        }
    }
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->paper_id < b->paper_id; });
    for (size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i]->paper_id == sorted[i - 1]->paper_id) {
            throw IndexError("duplicate register for paper " + sorted[i]->paper_id);
        }
    }
    std::vector<std::string> corpus_ids;
    for (const auto* reg : sorted) {
        corpus_ids.push_back(reg->paper_id);
    }

    const std::vector<NodePath> view_paths(view_set.begin(), view_set.end());
    std::vector<std::optional<ViewIndex>> built(view_paths.size());
    parallel_for(view_paths.size(), options.parallel_views, [&](size_t v) {
        const NodePath& path = view_paths[v];
        std::vector<std::string> ids;
        std::vector<std::vector<std::string>> token_docs;
        std::vector<std::vector<double>> vectors;
        for (const auto* reg : sorted) {
            const auto it = reg->contents.find(path);
            if (it == reg->contents.end() || trim(it->second).empty()) {
                continue;
            }
            if (kind == IndexKind::Lexical) {
                ids.push_back(reg->paper_id);
                token_docs.push_back(tokenize(it->second, options.tokenizer));
                continue;
            }
            try {
                vectors.push_back(model->embed(it->second).values);
                ids.push_back(reg->paper_id);
            } catch (const std::exception& e) {
                if (options.on_embed_error == EmbedFailurePolicy::Abort) {
                    throw IndexError("embedding paper " + reg->paper_id + " at " + path.str() + " failed: " + e.what());
                }
                spdlog::warn("skipping paper {} at {}: embedding failed: {}", reg->paper_id, path.str(), e.what());
            }
        }
        if (kind == IndexKind::Lexical) {
            built[v].emplace(path, LexicalIndex::build(std::move(ids), token_docs, options.bm25));
        } else {
            built[v].emplace(path, DenseIndex::build(std::move(ids), vectors));
        }
    });

    std::map<NodePath, ViewIndex> views;
    for (size_t v = 0; v < view_paths.size(); ++v) {
        views.emplace(view_paths[v], std::move(*built[v]));
    }
    return IndexTree(kind, options, std::move(versions), std::move(corpus_ids), std::move(views));
}

namespace {

constexpr std::string_view kManifest = "manifest.json";

std::string view_file_name(const NodePath& view) {
    std::string name;
    for (char c : view.str()) {
        name.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    }
    if (name.size() > 80) {
        name.resize(80);
    }
    // The hash suffix keeps distinct paths apart after sanitizing.
    return name + "-" + sha256_hex(view.str()).substr(0, 12) + ".bin";
}

std::string read_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw IndexError("cannot read " + file.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file_atomic(const std::filesystem::path& file, std::string_view bytes) {
    std::filesystem::path tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IndexError("cannot write " + tmp.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw IndexError("short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, file);
}

}  // namespace

std::string save_index(const IndexTree& tree, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    ordered_json manifest;
    manifest["format_version"] = kIndexFormatVersion;
    manifest["kind"] = std::string(to_string(tree.kind()));
    manifest["tokenizer"] = {{"remove_stopwords", tree.options().tokenizer.remove_stopwords}};
    manifest["bm25"] = {{"k1", tree.options().bm25.k1}, {"b", tree.options().bm25.b}};
    ordered_json versions = ordered_json::object();
    for (const auto& [type, version] : tree.schema_versions()) {
        versions[std::string(to_string(type))] = version;
    }
    manifest["schema_versions"] = std::move(versions);
    manifest["corpus_ids"] = tree.corpus_ids();

    std::set<std::string> written;
    ordered_json views = ordered_json::array();
    for (const auto& [path, view] : tree.views()) {
        BinaryWriter out;
        out.magic("RDXV");
        out.u32(kIndexFormatVersion);
        out.str(path.str());
        if (const auto* lexical = view.lexical()) {
            lexical->write(out);
        } else {
            view.dense()->write(out);
        }
        const std::string file = view_file_name(path);
        write_file_atomic(dir / file, out.bytes());
        written.insert(file);
        ordered_json entry;
        entry["path"] = path.str();
        entry["file"] = file;
        entry["doc_count"] = view.doc_count();
        entry["sha256"] = sha256_hex(out.bytes());
        views.push_back(std::move(entry));
    }
    manifest["views"] = std::move(views);

    // Drop view files left over from an earlier build into the same directory.
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.path().extension() == ".bin" && !written.contains(name)) {
            std::filesystem::remove(entry.path());
        }
    }

    const std::string text = manifest.dump(2) + "\n";
    write_file_atomic(dir / kManifest, text);
    return sha256_hex(text);
}

IndexTree load_index(const std::filesystem::path& dir) {
    const auto manifest_file = dir / kManifest;
    if (!std::filesystem::exists(manifest_file)) {
        throw IndexError("no index at " + dir.string() + " (missing " + std::string(kManifest) + ")");
    }
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_file));
    } catch (const json::parse_error& e) {
        throw CorruptionError(manifest_file.string() + ": malformed manifest: " + e.what());
    }
    try {
        const int version = manifest.at("format_version").get<int>();
        if (version != kIndexFormatVersion) {
            throw FormatVersionError("index at " + dir.string() + " has format version " + std::to_string(version) +
                                     ", this build reads version " + std::to_string(kIndexFormatVersion) +
                                     "; rebuild the index");
        }
        const IndexKind kind = parse_index_kind(manifest.at("kind").get<std::string>());
        IndexOptions options;
        options.tokenizer.remove_stopwords = manifest.at("tokenizer").at("remove_stopwords").get<bool>();
        options.bm25.k1 = manifest.at("bm25").at("k1").get<double>();
        options.bm25.b = manifest.at("bm25").at("b").get<double>();
        std::map<PaperType, std::string> versions;
        for (const auto& [type, v] : manifest.at("schema_versions").items()) {
            const auto parsed = parse_paper_type(type);
            if (!parsed) {
                throw CorruptionError("manifest names unknown paper type '" + type + "'");
            }
            versions.emplace(*parsed, v.get<std::string>());
        }
        auto corpus_ids = manifest.at("corpus_ids").get<std::vector<std::string>>();

        std::map<NodePath, ViewIndex> views;
        for (const auto& entry : manifest.at("views")) {
            const NodePath path = NodePath::parse(entry.at("path").get<std::string>());
            const auto file = dir / entry.at("file").get<std::string>();
            const std::string bytes = read_file(file);
            if (sha256_hex(bytes) != entry.at("sha256").get<std::string>()) {
                throw CorruptionError("checksum mismatch for " + file.string() + " (view " + path.str() + ")");
            }
            BinaryReader in(bytes);
            in.expect_magic("RDXV");
            if (in.u32() != static_cast<std::uint32_t>(kIndexFormatVersion) || in.str() != path.str()) {
                throw CorruptionError(file.string() + " does not hold view " + path.str());
            }
            std::optional<ViewIndex> view;
            if (kind == IndexKind::Lexical) {
                view.emplace(path, LexicalIndex::read(in));
            } else {
                view.emplace(path, DenseIndex::read(in));
            }
            if (!in.at_end()) {
                throw CorruptionError(file.string() + " has trailing bytes");
            }
            if (view->doc_count() != entry.at("doc_count").get<size_t>()) {
                throw CorruptionError(file.string() + " document count disagrees with the manifest");
            }
            views.emplace(path, std::move(*view));
        }
        return IndexTree(kind, options, std::move(versions), std::move(corpus_ids), std::move(views));
    } catch (const json::exception& e) {
        throw CorruptionError(manifest_file.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw CorruptionError(manifest_file.string() + ": " + e.what());
    }
}

}  // namespace registerdex
