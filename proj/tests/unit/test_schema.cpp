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

#include <doctest.h>

#include <functional>

#include <json.hpp>

#include "registerdex/error.hpp"
#include "registerdex/schema.hpp"

using namespace registerdex;

namespace {

// Independent walk over the raw JSON document: (nodes, leaves, depth).
struct Shape {
    size_t nodes = 0;
    size_t leaves = 0;
    size_t depth = 0;
};

Shape raw_shape(std::string_view document) {
    const auto doc = nlohmann::json::parse(document);
    Shape shape;
    std::function<void(const nlohmann::json&, size_t)> walk = [&](const nlohmann::json& node, size_t depth) {
        ++shape.nodes;
        shape.depth = std::max(shape.depth, depth);
        const auto it = node.find("children");
        if (it == node.end() || it->empty()) {
            ++shape.leaves;
            return;
        }
        for (const auto& child : *it) {
            walk(child, depth + 1);
        }
    };
    walk(doc.at("root"), 1);
    return shape;
}

}  // namespace

TEST_CASE("shipped schemas load with the expected shape") {
    const SchemaSet& schemas = default_schemas();
    CHECK(schemas.complete());
    for (PaperType type : kAllPaperTypes) {
        CAPTURE(to_string(type));
        const RegisterSchema& schema = schemas.at(type);
        const Shape shape = raw_shape(default_schema_document(type));
        CHECK(schema.paper_type() == type);
        CHECK(schema.root().name == "Abstract");
        CHECK(schema.depth() == 4);
        CHECK(schema.depth() == shape.depth);
        CHECK(schema.node_count() == shape.nodes);
        CHECK(all_paths(schema).size() == shape.nodes);
        CHECK(leaf_paths(schema).size() == shape.leaves);
    }
}

TEST_CASE("algorithm innovation schema has the operation path") {
    const auto& schema = default_schemas().at(PaperType::AlgorithmInnovation);
    CHECK(validate_path(schema, NodePath{"Abstract", "Method", "Implementation", "Operation"}));
    CHECK(validate_path(schema, NodePath{"Abstract", "Method", "Implementation", "Module"}));
    CHECK(validate_path(schema, NodePath{"Abstract", "Experiment", "Dataset"}));
    CHECK_FALSE(validate_path(schema, NodePath{"Abstract", "Method", "Nope"}));
    CHECK_FALSE(validate_path(schema, NodePath{"Method"}));
    CHECK_FALSE(validate_path(schema, NodePath{}));
}

TEST_CASE("paths are validated per schema") {
    const auto& schemas = default_schemas();
    for (PaperType type : kAllPaperTypes) {
        for (const auto& path : all_paths(schemas.at(type))) {
            CHECK(validate_path(schemas.at(type), path));
        }
    }
    const NodePath survey_only{"Abstract", "Review", "Category"};
    CHECK(validate_path(schemas.at(PaperType::Survey), survey_only));
    CHECK_FALSE(validate_path(schemas.at(PaperType::TheoryProof), survey_only));
}

TEST_CASE("node path parsing") {
    const NodePath path = NodePath::parse("Abstract/Method/Implementation");
    CHECK(path.depth() == 3);
    CHECK(path.str() == "Abstract/Method/Implementation");
    CHECK(path.parent() == NodePath{"Abstract", "Method"});
    CHECK(path.child("Module").depth() == 4);
    CHECK(NodePath{"Abstract"}.is_prefix_of(path));
    CHECK_FALSE(path.is_prefix_of(NodePath{"Abstract"}));
    CHECK_THROWS(NodePath::parse("Abstract//Method"));
    CHECK_THROWS(NodePath::parse(""));
}

TEST_CASE("schema round-trips through its serialized form") {
    for (PaperType type : kAllPaperTypes) {
        const auto& schema = default_schemas().at(type);
        const RegisterSchema again = load_schema(dump_schema(schema));
        CHECK(dump_schema(again) == dump_schema(schema));
        CHECK(all_paths(again) == all_paths(schema));
        CHECK(again.version() == schema.version());
    }
}

TEST_CASE("malformed schemas are rejected") {
    CHECK_THROWS_AS(load_schema("not json"), SchemaError);
    CHECK_THROWS_AS(load_schema(R"({"paper_type":"Survey","version":"1","root":{"name":"","description":"x"}})"),
                    SchemaError);
    // Duplicate sibling names make paths ambiguous.
    CHECK_THROWS_AS(load_schema(R"({"paper_type":"Survey","version":"1","root":{"name":"Abstract","description":"x",
        "children":[{"name":"A","description":"a"},{"name":"A","description":"b"}]}})"),
                    SchemaError);
    CHECK_THROWS_AS(load_schema(R"({"paper_type":"Nope","version":"1","root":{"name":"Abstract","description":"x"}})"),
                    SchemaError);
}

TEST_CASE("path trie accepts only schema paths") {
    const PathTrie trie(default_schemas());
    for (PaperType type : kAllPaperTypes) {
        for (const auto& path : all_paths(default_schemas().at(type))) {
            CHECK(trie.accepts(path));
            CHECK(trie.owners(path).contains(type));
        }
    }
    CHECK_FALSE(trie.accepts(NodePath{"Abstract", "Nowhere"}));
    CHECK(trie.owners(NodePath{"Abstract", "Review", "Category"}) == std::set<PaperType>{PaperType::Survey});
    const auto next = trie.continuations(NodePath{"Abstract"});
    CHECK(std::find(next.begin(), next.end(), "Method") != next.end());
    CHECK(trie.continuations(NodePath{"Bogus"}).empty());
}
