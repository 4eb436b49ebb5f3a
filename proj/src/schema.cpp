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

#include "registerdex/schema.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "registerdex/error.hpp"
#include "registerdex/resources.hpp"

namespace registerdex {

using nlohmann::json;

NodePath NodePath::parse(std::string_view joined) {
    std::vector<std::string> segments;
    size_t start = 0;
    while (true) {
        const size_t next = joined.find(kSeparator, start);
        const std::string_view segment = joined.substr(start, next == std::string_view::npos ? std::string_view::npos
                                                                                           : next - start);
        if (segment.empty()) {
            throw std::invalid_argument("empty segment in node path '" + std::string(joined) + "'");
        }
        segments.emplace_back(segment);
        if (next == std::string_view::npos) {
            break;
        }
        start = next + 1;
    }
    return NodePath(std::move(segments));
}

NodePath NodePath::child(std::string name) const {
    auto segments = segments_;
    segments.push_back(std::move(name));
    return NodePath(std::move(segments));
}

NodePath NodePath::parent() const {
    if (segments_.empty()) {
        return {};
    }
    return NodePath(std::vector<std::string>(segments_.begin(), segments_.end() - 1));
}

bool NodePath::is_prefix_of(const NodePath& other) const {
    return segments_.size() <= other.segments_.size() &&
           std::equal(segments_.begin(), segments_.end(), other.segments_.begin());
}

std::string NodePath::str() const {
    std::string out;
    for (size_t i = 0; i < segments_.size(); ++i) {
        if (i > 0) {
            out.push_back(kSeparator);
        }
        out.append(segments_[i]);
    }
    return out;
}

const SchemaNode* SchemaNode::child(std::string_view child_name) const {
    for (const auto& c : children) {
        if (c.name == child_name) {
            return &c;
        }
    }
    return nullptr;
}

namespace {

void validate_node(const SchemaNode& node, const NodePath& path) {
    if (node.name.empty()) {
        throw SchemaError("empty node name under '" + path.parent().str() + "'");
    }
    if (node.name.find(NodePath::kSeparator) != std::string::npos) {
        throw SchemaError("node name contains reserved '/': '" + path.str() + "'");
    }
    std::set<std::string_view> seen;
    for (const auto& child : node.children) {
        if (!child.name.empty() && !seen.insert(child.name).second) {
            throw SchemaError("duplicate sibling name at '" + path.child(child.name).str() + "'");
        }
    }
    for (const auto& child : node.children) {
        validate_node(child, path.child(child.name.empty() ? "?" : child.name));
    }
}

void measure(const SchemaNode& node, size_t depth, size_t& max_depth, size_t& count) {
    ++count;
    max_depth = std::max(max_depth, depth);
    for (const auto& child : node.children) {
        measure(child, depth + 1, max_depth, count);
    }
}

SchemaNode parse_node(const json& record, const NodePath& parent) {
    const std::string where = parent.empty() ? std::string("<root>") : parent.str();
    if (!record.is_object()) {
        throw SchemaError("node under '" + where + "' is not an object");
    }
    SchemaNode node;
    const auto name = record.find("name");
    if (name == record.end() || !name->is_string()) {
        throw SchemaError("node under '" + where + "' has no string \"name\"");
    }
    node.name = name->get<std::string>();
    const NodePath path = parent.child(node.name);
    if (const auto desc = record.find("description"); desc != record.end()) {
        if (!desc->is_string()) {
            throw SchemaError("\"description\" of '" + path.str() + "' is not a string");
        }
        node.description = desc->get<std::string>();
    }
    if (const auto children = record.find("children"); children != record.end() && !children->is_null()) {
        if (!children->is_array()) {
            throw SchemaError("\"children\" of '" + path.str() + "' is not an array");
        }
        for (const auto& child : *children) {
            node.children.push_back(parse_node(child, path));
        }
    }
    return node;
}

nlohmann::ordered_json node_to_json(const SchemaNode& node) {
    nlohmann::ordered_json out;
    out["name"] = node.name;
    out["description"] = node.description;
    if (!node.children.empty()) {
        auto children = nlohmann::ordered_json::array();
        for (const auto& child : node.children) {
            children.push_back(node_to_json(child));
        }
        out["children"] = std::move(children);
    }
    return out;
}

void collect_paths(const SchemaNode& node, const NodePath& path, bool leaves_only, std::vector<NodePath>& out) {
    if (!leaves_only || node.is_leaf()) {
        out.push_back(path);
    }
    for (const auto& child : node.children) {
        collect_paths(child, path.child(child.name), leaves_only, out);
    }
}

}  // namespace

RegisterSchema::RegisterSchema(PaperType paper_type, std::string version, SchemaNode root)
    : paper_type_(paper_type), version_(std::move(version)), root_(std::move(root)) {
    validate_node(root_, NodePath{root_.name});
    if (root_.children.empty()) {
        throw SchemaError("schema '" + root_.name + "' has no nodes below the root");
    }
    measure(root_, 1, depth_, node_count_);
}

const SchemaNode* RegisterSchema::find(const NodePath& path) const {
    if (path.empty() || path.segments().front() != root_.name) {
        return nullptr;
    }
    const SchemaNode* node = &root_;
    for (size_t i = 1; i < path.depth() && node != nullptr; ++i) {
        node = node->child(path.segments()[i]);
    }
    return node;
}

RegisterSchema load_schema(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("malformed schema document: ") + e.what());
    }
    if (!doc.is_object()) {
        throw SchemaError("schema document is not an object");
    }
    const auto type_field = doc.find("paper_type");
    if (type_field == doc.end() || !type_field->is_string()) {
        throw SchemaError("schema document has no string \"paper_type\"");
    }
    const auto type = parse_paper_type(type_field->get<std::string>());
    if (!type) {
        throw SchemaError("unknown paper_type '" + type_field->get<std::string>() + "'");
    }
    std::string version;
    if (const auto v = doc.find("version"); v != doc.end()) {
        if (!v->is_string()) {
            throw SchemaError("\"version\" is not a string");
        }
        version = v->get<std::string>();
    }
    const auto root = doc.find("root");
    if (root == doc.end() || root->is_null()) {
        throw SchemaError("schema document has no \"root\" (empty tree)");
    }
    return RegisterSchema(*type, std::move(version), parse_node(*root, NodePath{}));
}

RegisterSchema load_schema_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw SchemaError("cannot open schema file " + file.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return load_schema(buffer.str());
    } catch (const SchemaError& e) {
        throw SchemaError(file.string() + ": " + e.what());
    }
}

std::string dump_schema(const RegisterSchema& schema, int indent) {
    nlohmann::ordered_json out;
    out["paper_type"] = std::string(to_string(schema.paper_type()));
    out["version"] = schema.version();
    out["root"] = node_to_json(schema.root());
    return out.dump(indent);
}

std::vector<NodePath> all_paths(const RegisterSchema& schema) {
    std::vector<NodePath> out;
    out.reserve(schema.node_count());
    collect_paths(schema.root(), NodePath{schema.root().name}, false, out);
    return out;
}

std::vector<NodePath> leaf_paths(const RegisterSchema& schema) {
    std::vector<NodePath> out;
    collect_paths(schema.root(), NodePath{schema.root().name}, true, out);
    return out;
}

bool validate_path(const RegisterSchema& schema, const NodePath& path) {
    return schema.find(path) != nullptr;
}

void SchemaSet::add(RegisterSchema schema) {
    const PaperType type = schema.paper_type();
    schemas_.insert_or_assign(type, std::move(schema));
}

bool SchemaSet::contains(PaperType type) const {
    return schemas_.contains(type);
}

bool SchemaSet::complete() const {
    return std::all_of(kAllPaperTypes.begin(), kAllPaperTypes.end(), [&](PaperType t) { return contains(t); });
}

const RegisterSchema& SchemaSet::at(PaperType type) const {
    const auto it = schemas_.find(type);
    if (it == schemas_.end()) {
        throw SchemaError("no schema for paper type " + std::string(to_string(type)));
    }
    return it->second;
}

std::vector<const RegisterSchema*> SchemaSet::schemas() const {
    std::vector<const RegisterSchema*> out;
    for (const auto& [type, schema] : schemas_) {
        out.push_back(&schema);
    }
    return out;
}

std::string_view default_schema_document(PaperType type) {
    switch (type) {
        case PaperType::AlgorithmInnovation: return resources::schema_algorithm_innovation();
        case PaperType::BenchmarkConstruction: return resources::schema_benchmark_construction();
        case PaperType::MechanismExploration: return resources::schema_mechanism_exploration();
        case PaperType::Survey: return resources::schema_survey();
        case PaperType::TheoryProof: return resources::schema_theory_proof();
    }
    return resources::schema_algorithm_innovation();
}

const SchemaSet& default_schemas() {
    static const SchemaSet schemas = [] {
        SchemaSet set;
        for (PaperType type : kAllPaperTypes) {
            set.add(load_schema(default_schema_document(type)));
        }
        return set;
    }();
    return schemas;
}

SchemaSet load_schema_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw SchemaError("schema directory " + dir.string() + " does not exist");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    SchemaSet set;
    for (const auto& file : files) {
        auto schema = load_schema_file(file);
        if (set.contains(schema.paper_type())) {
            throw SchemaError(file.string() + ": second schema for paper type " +
                              std::string(to_string(schema.paper_type())));
        }
        set.add(std::move(schema));
    }
    for (PaperType type : kAllPaperTypes) {
        if (!set.contains(type)) {
            set.add(default_schemas().at(type));
        }
    }
    return set;
}

PathTrie::PathTrie(const SchemaSet& schemas) {
    for (const auto* schema : schemas.schemas()) {
        for (const auto& path : all_paths(*schema)) {
            insert(path, schema->paper_type());
        }
    }
}

void PathTrie::insert(const NodePath& path, PaperType owner) {
    Node* node = root_.get();
    for (const auto& segment : path.segments()) {
        auto& slot = node->children[segment];
        if (!slot) {
            slot = std::make_unique<Node>();
        }
        node = slot.get();
    }
    node->owners.insert(owner);
}

const PathTrie::Node* PathTrie::walk(const NodePath& path) const {
    const Node* node = root_.get();
    for (const auto& segment : path.segments()) {
        const auto it = node->children.find(segment);
        if (it == node->children.end()) {
            return nullptr;
        }
        node = it->second.get();
    }
    return node;
}

bool PathTrie::accepts(const NodePath& path) const {
    if (path.empty()) {
        return false;
    }
    const Node* node = walk(path);
    return node != nullptr && !node->owners.empty();
}

std::set<PaperType> PathTrie::owners(const NodePath& path) const {
    const Node* node = path.empty() ? nullptr : walk(path);
    return node == nullptr ? std::set<PaperType>{} : node->owners;
}

std::vector<std::string> PathTrie::continuations(const NodePath& prefix) const {
    std::vector<std::string> out;
    if (const Node* node = walk(prefix)) {
        for (const auto& [segment, child] : node->children) {
            out.push_back(segment);
        }
    }
    return out;
}

}  // namespace registerdex
