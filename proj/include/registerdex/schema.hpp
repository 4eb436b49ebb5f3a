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

#include <compare>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "registerdex/paper_type.hpp"

namespace registerdex {

/// Root-to-node sequence of node names. A path is what the rest of the engine
/// calls a "view": every index, register entry and recognizer output is keyed
/// by one.
class NodePath {
public:
    static constexpr char kSeparator = '/';

    NodePath() = default;
    explicit NodePath(std::vector<std::string> segments) : segments_(std::move(segments)) {}
    NodePath(std::initializer_list<std::string> segments) : segments_(segments) {}

    /// Splits on '/'. Empty segments are rejected.
    static NodePath parse(std::string_view joined);

    const std::vector<std::string>& segments() const { return segments_; }
    size_t depth() const { return segments_.size(); }
    bool empty() const { return segments_.empty(); }
    const std::string& back() const { return segments_.back(); }

    NodePath child(std::string name) const;
    NodePath parent() const;
    bool is_prefix_of(const NodePath& other) const;

    std::string str() const;

    auto operator<=>(const NodePath&) const = default;
    bool operator==(const NodePath&) const = default;

private:
    std::vector<std::string> segments_;
};

struct SchemaNode {
    std::string name;
    std::string description;
    std::vector<SchemaNode> children;

    bool is_leaf() const { return children.empty(); }
    const SchemaNode* child(std::string_view child_name) const;
};

class RegisterSchema {
public:
    RegisterSchema(PaperType paper_type, std::string version, SchemaNode root);

    PaperType paper_type() const { return paper_type_; }
    const std::string& version() const { return version_; }
    const SchemaNode& root() const { return root_; }

    /// Maximum number of nodes on any root-to-leaf path.
    size_t depth() const { return depth_; }
    size_t node_count() const { return node_count_; }

    /// Node at `path`, or nullptr when the path does not resolve.
    const SchemaNode* find(const NodePath& path) const;

private:
    PaperType paper_type_;
    std::string version_;
    SchemaNode root_;
    size_t depth_ = 0;
    size_t node_count_ = 0;
};

/// Parses and validates a schema JSON document. Throws SchemaError naming the
/// offending path.
RegisterSchema load_schema(std::string_view document);
RegisterSchema load_schema_file(const std::filesystem::path& file);

/// Serializes back to the schema file format (stable key order).
std::string dump_schema(const RegisterSchema& schema, int indent = 2);

/// Every root-to-node path, pre-order, children in declaration order.
std::vector<NodePath> all_paths(const RegisterSchema& schema);
/// Paths whose terminal node has no children, in pre-order.
std::vector<NodePath> leaf_paths(const RegisterSchema& schema);
bool validate_path(const RegisterSchema& schema, const NodePath& path);

/// One schema per paper type.
class SchemaSet {
public:
    SchemaSet() = default;

    void add(RegisterSchema schema);
    bool contains(PaperType type) const;
    bool complete() const;
    const RegisterSchema& at(PaperType type) const;
    std::vector<const RegisterSchema*> schemas() const;

private:
    std::map<PaperType, RegisterSchema> schemas_;
};

/// The five schemas shipped with the library (compiled in from data/schemas).
const SchemaSet& default_schemas();
/// Raw JSON of one shipped schema file.
std::string_view default_schema_document(PaperType type);

/// Loads every *.json file in `dir`; missing paper types are filled from the
/// shipped defaults.
SchemaSet load_schema_dir(const std::filesystem::path& dir);

/// Prefix tree over the node paths of a set of schemas. `accepts` answers
/// whether a complete path is a valid view in any schema; `continuations`
/// lists the segments that may legally follow a prefix, which is what a
/// constrained decoder needs at each step.
class PathTrie {
public:
    PathTrie() = default;
    explicit PathTrie(const SchemaSet& schemas);

    void insert(const NodePath& path, PaperType owner);

    bool accepts(const NodePath& path) const;
    /// Paper types whose schema contains `path` (empty if none).
    std::set<PaperType> owners(const NodePath& path) const;
    std::vector<std::string> continuations(const NodePath& prefix) const;

private:
    struct Node {
        std::map<std::string, std::unique_ptr<Node>, std::less<>> children;
        std::set<PaperType> owners;
    };
    const Node* walk(const NodePath& path) const;

    std::unique_ptr<Node> root_ = std::make_unique<Node>();
};

}  // namespace registerdex
