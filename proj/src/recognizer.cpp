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

#include "registerdex/recognizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "registerdex/error.hpp"
#include "registerdex/hashing.hpp"

namespace registerdex {

using nlohmann::json;

ViewCatalog::ViewCatalog(const SchemaSet& schemas) : schemas_(&schemas), trie_(schemas) {
    for (PaperType type : kAllPaperTypes) {
        if (!schemas.contains(type)) {
            continue;
        }
        const RegisterSchema& schema = schemas.at(type);
        for (const auto& path : all_paths(schema)) {
            const SchemaNode* node = schema.find(path);
            std::string text = split_camel_case(node->name) + " " + node->description;
            const std::string key = path.str();
            if (const auto it = by_path_.find(key); it != by_path_.end()) {
                auto& texts = candidates_[it->second].texts;
                if (std::find(texts.begin(), texts.end(), text) == texts.end()) {
                    texts.push_back(std::move(text));
                }
                continue;
            }
            by_path_.emplace(key, candidates_.size());
            candidates_.push_back({View{path, type}, {std::move(text)}});
        }
    }
}

std::optional<View> ViewCatalog::resolve(std::string_view joined) const {
    const auto it = by_path_.find(joined);
    if (it == by_path_.end()) {
        return std::nullopt;
    }
    return candidates_[it->second].view;
}

std::optional<View> ViewCatalog::resolve(const NodePath& path) const {
    return resolve(path.str());
}

bool ViewCatalog::valid(const View& view) const {
    return schemas_->contains(view.schema_type) && validate_path(schemas_->at(view.schema_type), view.path);
}

RecognizerOutput identify(std::string_view query, size_t k, Recognizer& recognizer, const ViewCatalog& catalog,
                          const ViewFilter& filter) {
    if (trim(query).empty()) {
        throw std::invalid_argument("empty query");
    }
    if (k == 0) {
        throw std::invalid_argument("k must be positive");
    }
    RecognizerOutput raw = recognizer.recognize(query, k, filter);
    const bool scored = raw.scores.size() == raw.views.size() && !raw.scores.empty();
    RecognizerOutput out;
    std::set<std::string> seen;
    for (size_t i = 0; i < raw.views.size() && out.views.size() < k; ++i) {
        const NodePath& path = raw.views[i].path;
        if (!catalog.trie().accepts(path) || !filter.allows(path) || !seen.insert(path.str()).second) {
            continue;
        }
        // Keep the recognizer's schema attribution when it is a legal owner.
        View view = catalog.valid(raw.views[i]) ? raw.views[i] : *catalog.resolve(path);
        out.views.push_back(std::move(view));
        if (scored) {
            out.scores.push_back(raw.scores[i]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lexical

namespace {

using SparseVector = std::map<std::string, double, std::less<>>;

SparseVector term_counts(std::string_view text, const TokenizerOptions& tokenizer) {
    SparseVector counts;
    for (auto& token : tokenize(text, tokenizer)) {
        counts[std::move(token)] += 1.0;
    }
    return counts;
}

void normalize(SparseVector& v) {
    double norm = 0.0;
    for (const auto& [term, w] : v) {
        norm += w * w;
    }
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (auto& [term, w] : v) {
            w /= norm;
        }
    }
}

// Descending score, then shallower path, then segment-wise lexicographic.
bool ranks_before(double sa, const NodePath& a, double sb, const NodePath& b) {
    if (sa != sb) {
        return sa > sb;
    }
    if (a.depth() != b.depth()) {
        return a.depth() < b.depth();
    }
    return a.segments() < b.segments();
}

}  // namespace

LexicalRecognizer::LexicalRecognizer(const ViewCatalog& catalog, TokenizerOptions tokenizer)
    : catalog_(catalog), tokenizer_(tokenizer) {
    std::vector<SparseVector> counts;
    std::map<std::string, size_t, std::less<>> df;
    for (const auto& candidate : catalog.candidates()) {
        std::string text;
        for (const auto& t : candidate.texts) {
            text += t + "\n";
        }
        counts.push_back(term_counts(text, tokenizer_));
        for (const auto& [term, c] : counts.back()) {
            ++df[term];
        }
    }
    // Smoothed idf: ln((1 + N) / (1 + df)) + 1.
    const double n = static_cast<double>(counts.size());
    for (const auto& [term, f] : df) {
        idf_.emplace(term, std::log((1.0 + n) / (1.0 + static_cast<double>(f))) + 1.0);
    }
    vectors_.reserve(counts.size());
    for (auto& c : counts) {
        for (auto& [term, w] : c) {
            w *= idf_.find(term)->second;
        }
        normalize(c);
        vectors_.push_back(std::move(c));
    }
}

std::vector<double> LexicalRecognizer::similarities(std::string_view query) const {
    SparseVector q;
    for (const auto& [term, c] : term_counts(query, tokenizer_)) {
        if (const auto it = idf_.find(term); it != idf_.end()) {
            q.emplace(term, c * it->second);
        }
    }
    normalize(q);
    std::vector<double> sims(vectors_.size(), 0.0);
    if (q.empty()) {
        return sims;
    }
    for (size_t i = 0; i < vectors_.size(); ++i) {
        double dot = 0.0;
        for (const auto& [term, w] : q) {
            if (const auto it = vectors_[i].find(term); it != vectors_[i].end()) {
                dot += w * it->second;
            }
        }
        sims[i] = dot;
    }
    return sims;
}

RecognizerOutput LexicalRecognizer::recognize(std::string_view query, size_t k, const ViewFilter& filter) {
    const auto sims = similarities(query);
    const auto& candidates = catalog_.candidates();
    std::vector<size_t> order;
    for (size_t i = 0; i < candidates.size(); ++i) {
        if (filter.allows(candidates[i].view.path)) {
            order.push_back(i);
        }
    }
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return ranks_before(sims[a], candidates[a].view.path, sims[b], candidates[b].view.path);
    });
    if (order.size() > k) {
        order.resize(k);
    }
    RecognizerOutput out;
    for (size_t i : order) {
        out.views.push_back(candidates[i].view);
        out.scores.push_back(sims[i]);
    }
    return out;
}

RecognizerOutput lexical_identify(std::string_view query, size_t k, const ViewCatalog& catalog) {
    LexicalRecognizer recognizer(catalog);
    return identify(query, k, recognizer, catalog);
}

// ---------------------------------------------------------------------------
// Remote

RemoteRecognizer::RemoteRecognizer(std::string endpoint_url, std::shared_ptr<HttpTransport> transport,
                                   const ViewCatalog& catalog, bool fallback_on_error, RetryPolicy policy)
    : endpoint_url_(std::move(endpoint_url)),
      transport_(std::move(transport)),
      catalog_(catalog),
      lexical_(catalog),
      fallback_on_error_(fallback_on_error),
      policy_(policy),
      limiter_(policy.max_in_flight) {}

std::vector<std::string> RemoteRecognizer::warnings() const {
    std::lock_guard lock(mutex_);
    return warnings_;
}

RecognizerOutput RemoteRecognizer::recognize(std::string_view query, size_t k, const ViewFilter& filter) {
    const auto warn = [&](std::string message) {
        spdlog::warn("{}", message);
        std::lock_guard lock(mutex_);
        warnings_.push_back(std::move(message));
    };
    std::vector<std::string> paths;
    try {
        const json body = {{"query", std::string(query)}, {"k", k}};
        HttpResponse response;
        {
            auto permit = limiter_.acquire();
            response = post_with_retry(*transport_, {endpoint_url_, {}, body.dump(), policy_.timeout}, policy_);
        }
        paths = json::parse(response.body).at("paths").get<std::vector<std::string>>();
    } catch (const std::exception& e) {
        if (!fallback_on_error_) {
            throw TransportError(std::string("recognizer endpoint failed: ") + e.what());
        }
        warn(std::string("recognizer endpoint failed, using lexical recognizer: ") + e.what());
        return lexical_.recognize(query, k, filter);
    }

    RecognizerOutput out;
    std::set<std::string> seen;
    for (const auto& joined : paths) {
        const auto view = catalog_.resolve(joined);
        if (!view) {
            warn("recognizer endpoint returned unknown view '" + joined + "'");
            continue;
        }
        if (filter.allows(view->path) && seen.insert(joined).second && out.views.size() < k) {
            out.views.push_back(*view);
        }
    }
    if (out.views.size() < k) {
        for (const auto& view : lexical_.recognize(query, catalog_.candidates().size(), filter).views) {
            if (out.views.size() >= k) {
                break;
            }
            if (seen.insert(view.path.str()).second) {
                out.views.push_back(view);
            }
        }
    }
    return out;
}

RecognizerOutput FixedRecognizer::recognize(std::string_view, size_t, const ViewFilter&) {
    return {views_, {}};
}

// ---------------------------------------------------------------------------
// Reference recognizers for evaluation

namespace {

const View& golden_for(const std::map<std::string, View, std::less<>>& golden, std::string_view query) {
    const auto it = golden.find(query);
    if (it == golden.end()) {
        throw DataError("no golden view for query '" + std::string(utf8_truncate(query, 60)) + "'");
    }
    return it->second;
}

}  // namespace

OracleRecognizer::OracleRecognizer(std::map<std::string, View, std::less<>> golden, const ViewCatalog& catalog)
    : golden_(std::move(golden)), catalog_(catalog) {}

RecognizerOutput OracleRecognizer::recognize(std::string_view query, size_t k, const ViewFilter& filter) {
    const View& golden = golden_for(golden_, query);
    if (filter.allows(golden.path)) {
        return {{golden}, {}};
    }
    for (NodePath p = golden.path.parent(); !p.empty(); p = p.parent()) {
        if (filter.allows(p)) {
            return {{catalog_.resolve(p).value_or(View{p, golden.schema_type})}, {}};
        }
    }
    RecognizerOutput out;
    size_t shallowest = SIZE_MAX;
    for (const auto& candidate : catalog_.candidates()) {
        const NodePath& p = candidate.view.path;
        if (golden.path.is_prefix_of(p) && filter.allows(p)) {
            shallowest = std::min(shallowest, p.depth());
        }
    }
    for (const auto& candidate : catalog_.candidates()) {
        const NodePath& p = candidate.view.path;
        if (golden.path.is_prefix_of(p) && p.depth() == shallowest && out.views.size() < k) {
            out.views.push_back(candidate.view);
        }
    }
    return out;
}

AdversarialRecognizer::AdversarialRecognizer(std::map<std::string, View, std::less<>> golden,
                                             const ViewCatalog& catalog)
    : golden_(std::move(golden)), catalog_(catalog) {}

RecognizerOutput AdversarialRecognizer::recognize(std::string_view query, size_t k, const ViewFilter& filter) {
    const View& golden = golden_for(golden_, query);
    const auto& candidates = catalog_.candidates();
    std::vector<std::pair<double, size_t>> ranked;
    for (size_t i = 0; i < candidates.size(); ++i) {
        const NodePath& p = candidates[i].view.path;
        if (p != golden.path && filter.allows(p)) {
            ranked.emplace_back(hierarchical_reward(golden.path, p), i);
        }
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](auto& a, auto& b) { return a.first < b.first; });
    RecognizerOutput out;
    for (size_t i = 0; i < ranked.size() && i < k; ++i) {
        out.views.push_back(candidates[ranked[i].second].view);
    }
    return out;
}

RandomRecognizer::RandomRecognizer(const ViewCatalog& catalog, std::uint64_t seed) : catalog_(catalog), seed_(seed) {}

RecognizerOutput RandomRecognizer::recognize(std::string_view query, size_t k, const ViewFilter& filter) {
    std::vector<size_t> pool;
    for (size_t i = 0; i < catalog_.candidates().size(); ++i) {
        if (filter.allows(catalog_.candidates()[i].view.path)) {
            pool.push_back(i);
        }
    }
    std::uint64_t state = seed_ ^ fnv1a64(query);
    std::mt19937_64 rng(splitmix64(state));
    RecognizerOutput out;
    // Partial Fisher-Yates; modulo keeps the draw independent of the
    // library's distribution implementation.
    for (size_t i = 0; i < pool.size() && i < k; ++i) {
        const size_t j = i + static_cast<size_t>(rng() % (pool.size() - i));
        std::swap(pool[i], pool[j]);
        out.views.push_back(catalog_.candidates()[pool[i]].view);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reward and evaluation

size_t path_overlap(const NodePath& a, const NodePath& b) {
    const size_t n = std::min(a.depth(), b.depth());
    size_t i = 0;
    while (i < n && a.segments()[i] == b.segments()[i]) {
        ++i;
    }
    return i;
}

double hierarchical_reward(const NodePath& golden, const NodePath& predicted) {
    if (golden.empty() || predicted.empty()) {
        return 0.0;
    }
    const auto overlap = static_cast<double>(path_overlap(golden, predicted));
    return overlap / static_cast<double>(predicted.depth()) + overlap / static_cast<double>(golden.depth());
}

double hierarchical_reward(const View& golden, const View& predicted) {
    return hierarchical_reward(golden.path, predicted.path);
}

std::vector<RecognizerExample> load_recognizer_examples(const std::filesystem::path& file,
                                                        const ViewCatalog& catalog) {
    std::ifstream in(file);
    if (!in) {
        throw DataError("cannot open recognizer examples " + file.string());
    }
    std::vector<RecognizerExample> examples;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const std::string where = file.string() + ":" + std::to_string(line_no) + ": ";
        try {
            const json record = json::parse(line);
            RecognizerExample example;
            example.query = record.at("query").get<std::string>();
            const std::string joined = record.at("golden_view").get<std::string>();
            auto view = catalog.resolve(joined);
            if (!view) {
                throw DataError("golden view '" + joined + "' is not in any schema");
            }
            if (const auto it = record.find("schema_type"); it != record.end() && !it->is_null()) {
                const auto type = parse_paper_type(it->get<std::string>());
                if (!type) {
                    throw DataError("unknown schema_type '" + it->get<std::string>() + "'");
                }
                view->schema_type = *type;
                if (!catalog.valid(*view)) {
                    throw DataError("golden view '" + joined + "' is not in the " + std::string(to_string(*type)) +
                                    " schema");
                }
            }
            example.golden_view = *view;
            if (const auto it = record.find("paper_id"); it != record.end() && it->is_string()) {
                example.paper_id = it->get<std::string>();
            }
            examples.push_back(std::move(example));
        } catch (const json::exception& e) {
            throw DataError(where + e.what());
        } catch (const DataError& e) {
            throw DataError(where + e.what());
        }
    }
    return examples;
}

void write_recognizer_examples(const std::filesystem::path& file, std::span<const RecognizerExample> examples) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) {
        throw DataError("cannot write recognizer examples " + file.string());
    }
    for (const auto& example : examples) {
        nlohmann::ordered_json record;
        record["query"] = example.query;
        record["golden_view"] = example.golden_view.path.str();
        record["schema_type"] = std::string(to_string(example.golden_view.schema_type));
        if (example.paper_id) {
            record["paper_id"] = *example.paper_id;
        }
        out << record.dump() << '\n';
    }
}

RecognizerReport evaluate_recognizer(std::span<const RecognizerExample> examples, Recognizer& recognizer,
                                     const ViewCatalog& catalog, size_t k) {
    RecognizerReport report;
    report.examples = examples.size();
    if (examples.empty()) {
        return report;
    }
    size_t hits = 0;
    double reward = 0.0;
    for (const auto& example : examples) {
        const auto out = identify(example.query, k, recognizer, catalog);
        std::string predicted;
        if (!out.views.empty()) {
            predicted = out.views.front().path.str();
            reward += hierarchical_reward(example.golden_view, out.views.front());
            if (out.views.front().path == example.golden_view.path) {
                ++hits;
            }
        }
        ++report.confusion[example.golden_view.path.str()][predicted];
    }
    report.top1_accuracy = static_cast<double>(hits) / static_cast<double>(examples.size());
    report.mean_reward = reward / static_cast<double>(examples.size());
    return report;
}

}  // namespace registerdex
