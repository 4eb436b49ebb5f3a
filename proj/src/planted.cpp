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

#include "registerdex/planted.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "registerdex/error.hpp"

namespace registerdex {

using nlohmann::ordered_json;

std::string granularity_tag(size_t depth) {
    if (depth <= 1) {
        return "coarse";
    }
    return "fine-" + std::to_string(depth - 1);
}

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";
constexpr std::string_view kFiller[] = {"recent", "novel", "practical", "careful", "broad", "detailed", "systematic",
                                        "efficient", "robust", "general"};

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Modulo draws keep the output independent of the standard library's
    // distribution implementations.
    size_t below(size_t n) { return static_cast<size_t>(engine_() % n); }
    bool chance(double p) { return static_cast<double>(engine_() >> 11) * 0x1.0p-53 < p; }

private:
    std::mt19937_64 engine_;
};

class MarkerSource {
public:
    MarkerSource(Rng& rng, std::set<std::string> reserved) : rng_(rng), used_(std::move(reserved)) {}

    std::string next() {
        while (true) {
            std::string word;
            for (int s = 0; s < 3; ++s) {
                word.push_back(kConsonants[rng_.below(kConsonants.size())]);
                word.push_back(kVowels[rng_.below(kVowels.size())]);
            }
            word.push_back(kConsonants[rng_.below(kConsonants.size())]);
            if (used_.insert(word).second) {
                return word;
            }
        }
    }

private:
    Rng& rng_;
    std::set<std::string> used_;
};

struct NodePlan {
    std::string markers[2];
    std::string content;
};

std::vector<std::string> theme_words(const SchemaNode& node) {
    auto words = tokenize(node.description, {.remove_stopwords = true});
    if (words.size() > 3) {
        words.resize(3);
    }
    return words;
}

std::string lower_words(std::string_view name) {
    return join(tokenize(split_camel_case(name)), " ");
}

std::string fenced(const ordered_json& body) {
    return "```json\n" + body.dump(2) + "\n```";
}

}  // namespace

PlantedCorpus generate_planted_corpus(const SchemaSet& schemas, const PlantedOptions& options) {
    if (options.blank_leaf_probability < 0.0 || options.blank_leaf_probability >= 1.0) {
        throw std::invalid_argument("blank_leaf_probability must be in [0, 1)");
    }
    Rng rng(options.seed);
    // Reserve every schema word so markers never collide with theme terms.
    std::set<std::string> reserved;
    for (const auto* schema : schemas.schemas()) {
        for (const auto& path : all_paths(*schema)) {
            const SchemaNode* node = schema->find(path);
            for (auto& t : tokenize(split_camel_case(node->name) + " " + node->description)) {
                reserved.insert(std::move(t));
            }
        }
    }
    MarkerSource markers(rng, std::move(reserved));

    PlantedCorpus out;
    struct QueryCandidate {
        size_t paper;
        NodePath path;
    };
    std::map<size_t, std::vector<QueryCandidate>> by_depth;
    std::vector<std::map<NodePath, NodePlan>> plans(options.papers);

    const size_t width = std::to_string(std::max<size_t>(options.papers, 1)).size();
    for (size_t i = 0; i < options.papers; ++i) {
        const PaperType type = options.mixed_types ? kAllPaperTypes[i % kAllPaperTypes.size()]
                                                   : PaperType::AlgorithmInnovation;
        const RegisterSchema& schema = schemas.at(type);
        const auto paths = all_paths(schema);
        auto& plan = plans[i];

        std::string id = std::to_string(i + 1);
        id = "planted-" + std::string(width - id.size(), '0') + id;

        // Leaves first, then internal nodes deepest first, as the builder does.
        for (const auto& path : paths) {
            NodePlan& node_plan = plan[path];
            node_plan.markers[0] = markers.next();
            node_plan.markers[1] = markers.next();
            const SchemaNode* node = schema.find(path);
            if (node->is_leaf() && !rng.chance(options.blank_leaf_probability)) {
                node_plan.content = "The " + lower_words(node->name) + " " + join(theme_words(*node), " ") +
                                    " relies on " + node_plan.markers[0] + " and " + node_plan.markers[1] + ".";
            }
        }
        std::vector<NodePath> internal;
        for (const auto& path : paths) {
            if (!schema.find(path)->is_leaf()) {
                internal.push_back(path);
            }
        }
        std::stable_sort(internal.begin(), internal.end(),
                         [](const NodePath& a, const NodePath& b) { return a.depth() > b.depth(); });
        for (const auto& path : internal) {
            const SchemaNode* node = schema.find(path);
            const bool any_child = std::any_of(node->children.begin(), node->children.end(), [&](const SchemaNode& c) {
                return !plan.at(path.child(c.name)).content.empty();
            });
            if (any_child) {
                NodePlan& node_plan = plan.at(path);
                node_plan.content = "Overall the " + lower_words(node->name) + " " +
                                    join(theme_words(*node), " ") + " is characterized by " + node_plan.markers[0] +
                                    " and " + node_plan.markers[1] + ".";
            }
        }

        PaperDoc doc;
        doc.id = id;
        const NodePath root{schema.root().name};
        const NodePlan& root_plan = plan.at(root);
        doc.title = "A " + std::string(kFiller[rng.below(std::size(kFiller))]) + " " +
                    lower_words(std::string(display_label(type))) + " study of " + root_plan.markers[0];
        std::string abstract = "We present work on " + root_plan.markers[0] + " and " + root_plan.markers[1] + ".";
        for (size_t c = 0; c < schema.root().children.size() && c < 2; ++c) {
            const NodePlan& child = plan.at(root.child(schema.root().children[c].name));
            abstract += " It also touches on " + child.markers[0] + " and " + child.markers[1] + ".";
        }
        doc.abstract = abstract;
        std::vector<std::string> paragraphs;
        for (const auto& path : paths) {
            const std::string& content = plan.at(path).content;
            if (!content.empty()) {
                paragraphs.push_back(content + " This part of the " +
                                     std::string(kFiller[rng.below(std::size(kFiller))]) + " study is discussed here.");
            }
        }
        doc.full_text = join(paragraphs, "\n\n");
        if (!options.classify_via_model) {
            doc.declared_type = type;
        }

        // Model replies that make replay reproduce the plan exactly.
        HierarchicalRegister reg;
        reg.paper_id = doc.id;
        reg.paper_type = type;
        reg.schema_version = schema.version();
        if (options.classify_via_model) {
            const auto request = ContentModel::classification_request(doc);
            out.transcripts.push_back({request.key, request.operation, std::string(display_label(type))});
        }
        for (const auto& path : paths) {
            const SchemaNode* node = schema.find(path);
            const std::string& content = plan.at(path).content;
            reg.contents.emplace(path, content);
            if (node->is_leaf()) {
                const auto request = ContentModel::extraction_request(doc, *node, path);
                ordered_json body;
                body[node->name] = content;
                out.transcripts.push_back({request.key, request.operation, fenced(body)});
            }
        }
        for (const auto& path : internal) {
            const SchemaNode* node = schema.find(path);
            std::vector<ChildContent> present;
            for (const auto& child : node->children) {
                const std::string& content = plan.at(path.child(child.name)).content;
                if (!content.empty()) {
                    present.push_back({child.name, child.description, content});
                }
            }
            if (present.empty()) {
                continue;
            }
            const auto request = ContentModel::aggregation_request(path, present);
            ordered_json body;
            body["root_name"] = node->name;
            body["root_value"] = plan.at(path).content;
            out.transcripts.push_back({request.key, request.operation, fenced(body)});
        }

        for (const auto& path : paths) {
            if (!plan.at(path).content.empty()) {
                by_depth[path.depth()].push_back({i, path});
            }
        }
        out.docs.push_back(std::move(doc));
        out.expected_registers.push_back(std::move(reg));
    }

    for (auto& [depth, candidates] : by_depth) {
        // Partial Fisher-Yates without replacement.
        const size_t take = std::min(options.queries_per_tag, candidates.size());
        for (size_t q = 0; q < take; ++q) {
            std::swap(candidates[q], candidates[q + rng.below(candidates.size() - q)]);
            const auto& [paper, path] = candidates[q];
            const PaperDoc& doc = out.docs[paper];
            const PaperType type = out.expected_registers[paper].paper_type;
            const SchemaNode* node = schemas.at(type).find(path);
            const NodePlan& plan = plans[paper].at(path);

            EvalQuery query;
            query.query = lower_words(node->name) + " " + join(theme_words(*node), " ") + " " +
                          std::string(kFiller[rng.below(std::size(kFiller))]) + " " + plan.markers[0] + " " +
                          plan.markers[1];
            query.relevant_ids = {doc.id};
            query.granularity_tag = granularity_tag(depth);
            query.golden_view = path.str();
            query.schema_type = type;
            out.recognizer_examples.push_back({query.query, View{path, type}, doc.id});
            out.queries.push_back(std::move(query));
        }
    }
    return out;
}

void write_planted_corpus(const PlantedCorpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_corpus(dir / "corpus.jsonl", corpus.docs);
    write_transcripts(dir / "transcripts.jsonl", corpus.transcripts);
    write_eval_queries(dir / "eval.jsonl", corpus.queries);
    write_recognizer_examples(dir / "recognizer_eval.jsonl", corpus.recognizer_examples);
    write_register_store(dir / "expected_registers.jsonl", corpus.expected_registers);
}

std::map<std::string, View, std::less<>> golden_views(std::span<const EvalQuery> queries, const ViewCatalog& catalog) {
    std::map<std::string, View, std::less<>> golden;
    for (const auto& q : queries) {
        if (!q.golden_view) {
            continue;
        }
        auto view = catalog.resolve(*q.golden_view);
        if (!view) {
            throw DataError("golden view '" + *q.golden_view + "' is not in any schema");
        }
        if (q.schema_type) {
            view->schema_type = *q.schema_type;
        }
        golden.emplace(q.query, *view);
    }
    return golden;
}

}  // namespace registerdex
