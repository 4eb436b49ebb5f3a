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

#include <fstream>

#include "registerdex/error.hpp"
#include "registerdex/planted.hpp"
#include "registerdex/register_builder.hpp"
#include "test_support.hpp"

using namespace registerdex;
using registerdex::testing::TempDir;

namespace {

// Extracts "<name> text" for every leaf except those listed as blank, and
// aggregates by joining child names.
class ScriptedGenerator final : public Generator {
public:
    explicit ScriptedGenerator(std::set<std::string> blank = {}, std::set<std::string> failing = {})
        : blank_(std::move(blank)), failing_(std::move(failing)) {}

    std::string complete(const ModelRequest& request) override {
        std::lock_guard lock(mutex_);
        ++calls[request.operation];
        if (request.operation == "classify") {
            return "Algorithm Innovation";
        }
        if (request.operation == "extract") {
            const std::string name = request.inputs.at("name");
            const std::string path = request.inputs.at("path");
            if (failing_.contains(path)) {
                throw ModelError("scripted failure");
            }
            const std::string value = blank_.contains(path) ? "" : name + " text";
            return "```json\n" + nlohmann::json{{name, value}}.dump() + "\n```";
        }
        std::string joined;
        for (const auto& child : request.inputs.at("children")) {
            joined += child.at("node_name").get<std::string>() + ";";
        }
        return "```json\n" + nlohmann::json{{"root_value", joined}}.dump() + "\n```";
    }

    std::map<std::string, int> calls;

private:
    std::set<std::string> blank_;
    std::set<std::string> failing_;
    std::mutex mutex_;
};

PaperDoc doc(std::string id) {
    return PaperDoc{std::move(id), "Title", "Abstract text.", "Full text.", PaperType::AlgorithmInnovation};
}

}  // namespace

TEST_CASE("register covers every path and makes the minimum number of calls") {
    const auto& schema = default_schemas().at(PaperType::AlgorithmInnovation);
    auto generator = std::make_shared<ScriptedGenerator>();
    ContentModel model(generator, nullptr);
    const auto reg = build_register(doc("p1"), default_schemas(), model);
    CHECK(reg.contents.size() == schema.node_count());
    check_register(reg, schema);
    const size_t leaves = leaf_paths(schema).size();
    CHECK(generator->calls["extract"] == static_cast<int>(leaves));
    CHECK(generator->calls["aggregate"] == static_cast<int>(schema.node_count() - leaves));
    CHECK(generator->calls["classify"] == 0);
    CHECK(reg.at(NodePath{"Abstract", "Method", "Implementation", "Operation"}) == "Operation text");
}

TEST_CASE("an internal node with only empty children is empty and costs nothing") {
    const auto& schema = default_schemas().at(PaperType::AlgorithmInnovation);
    const NodePath parent{"Abstract", "Method", "Implementation"};
    std::set<std::string> blank;
    size_t blank_children = 0;
    for (const auto& child : schema.find(parent)->children) {
        blank.insert(parent.child(child.name).str());
        ++blank_children;
    }
    auto generator = std::make_shared<ScriptedGenerator>(blank);
    ContentModel model(generator, nullptr);
    const auto reg = build_register(doc("p1"), default_schemas(), model);
    CHECK(reg.at(parent).empty());
    const size_t leaves = leaf_paths(schema).size();
    CHECK(generator->calls["extract"] == static_cast<int>(leaves));
    // Every internal node but `parent` is aggregated (it has leaf children only).
    CHECK(blank_children > 0);
    CHECK(generator->calls["aggregate"] == static_cast<int>(schema.node_count() - leaves - 1));
    // The grandparent still aggregates its remaining children.
    CHECK(reg.at(parent.parent()).find("Implementation") == std::string::npos);
}

TEST_CASE("extraction failures honor the policy") {
    const std::string bad = "Abstract/Method/Implementation/Operation";
    SUBCASE("fail") {
        ContentModel model(std::make_shared<ScriptedGenerator>(std::set<std::string>{}, std::set<std::string>{bad}),
                           nullptr);
        CHECK_THROWS_AS(build_register(doc("p1"), default_schemas(), model), BuildError);
    }
    SUBCASE("blank") {
        ContentModel model(std::make_shared<ScriptedGenerator>(std::set<std::string>{}, std::set<std::string>{bad}),
                           nullptr);
        BuildOptions options;
        options.on_extract_error = OnExtractError::Blank;
        const auto reg = build_register(doc("p1"), default_schemas(), model, options);
        CHECK(reg.at(NodePath::parse(bad)).empty());
        CHECK_FALSE(model.warnings().empty());
    }
}

TEST_CASE("corpus build reports every failing paper") {
    std::vector<PaperDoc> corpus{doc("a"), doc("b")};
    corpus[1].abstract = "";
    corpus[1].declared_type.reset();
    ContentModel model(std::make_shared<ScriptedGenerator>(), nullptr);
    try {
        build_corpus_registers(corpus, default_schemas(), model);
        FAIL("expected CorpusBuildError");
    } catch (const CorpusBuildError& e) {
        REQUIRE(e.failures().size() == 1);
        CHECK(e.failures()[0].paper_id == "b");
    }
}

TEST_CASE("cached registers are reused without model calls") {
    std::vector<PaperDoc> corpus{doc("a"), doc("b")};
    auto generator = std::make_shared<ScriptedGenerator>();
    ContentModel model(generator, nullptr);
    const auto first = build_corpus_registers(corpus, default_schemas(), model);
    const size_t calls = model.generator_calls();
    const auto second = build_corpus_registers(corpus, default_schemas(), model, {}, &first);
    CHECK(second == first);
    CHECK(model.generator_calls() == calls);
}

TEST_CASE("planted transcripts replay into the expected registers") {
    PlantedOptions options;
    options.papers = 25;
    options.seed = 5;
    const auto planted = generate_planted_corpus(default_schemas(), options);
    auto store = std::make_shared<TranscriptStore>();
    for (const auto& t : planted.transcripts) {
        store->add(t);
    }
    ContentModel model(std::make_shared<ReplayGenerator>(store), nullptr);
    const auto built = build_corpus_registers(planted.docs, default_schemas(), model);
    CHECK(built == planted.expected_registers);
    // Exactly one call per transcript: nothing wasted, nothing missing.
    CHECK(model.generator_calls() == planted.transcripts.size());
    for (const auto& reg : built) {
        check_register(reg, default_schemas().at(reg.paper_type));
    }
}

TEST_CASE("register store round-trips sorted by id") {
    TempDir dir("store");
    ContentModel model(std::make_shared<ScriptedGenerator>(), nullptr);
    std::vector<PaperDoc> corpus{doc("b"), doc("a")};
    const auto regs = build_corpus_registers(corpus, default_schemas(), model);
    write_register_store(dir / "store.jsonl", regs);
    const auto back = load_register_store(dir / "store.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[0].paper_id == "a");
    CHECK(back[1] == regs[0]);
    CHECK(register_from_json(nlohmann::json::parse(serialize_register(regs[0]))) == regs[0]);
}

TEST_CASE("check_register rejects incomplete or foreign registers") {
    const auto& schema = default_schemas().at(PaperType::AlgorithmInnovation);
    ContentModel model(std::make_shared<ScriptedGenerator>(), nullptr);
    auto reg = build_register(doc("a"), default_schemas(), model);
    auto missing = reg;
    missing.contents.erase(NodePath{"Abstract", "Method"});
    CHECK_THROWS(check_register(missing, schema));
    auto foreign = reg;
    foreign.contents[NodePath{"Abstract", "Review", "Category"}] = "x";
    CHECK_THROWS(check_register(foreign, schema));
}
