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
#include <sstream>

#include "registerdex/error.hpp"
#include "registerdex/index_tree.hpp"
#include "registerdex/planted.hpp"
#include "test_support.hpp"

using namespace registerdex;
using registerdex::testing::TempDir;

namespace {

const PlantedCorpus& planted() {
    static const PlantedCorpus corpus = [] {
        PlantedOptions options;
        options.papers = 30;
        options.seed = 9;
        return generate_planted_corpus(default_schemas(), options);
    }();
    return corpus;
}

std::string slurp(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

TEST_CASE("one view per path, counting only non-empty contents") {
    const auto& regs = planted().expected_registers;
    const auto tree = build_index_tree(regs, IndexKind::Lexical, nullptr);
    // Independent doc counts straight from the registers.
    std::map<NodePath, size_t> expected;
    for (const auto& reg : regs) {
        for (const auto& [path, content] : reg.contents) {
            expected[path] += content.empty() ? 0 : 1;
        }
    }
    for (const auto& [path, count] : expected) {
        const ViewIndex* view = tree.find(path);
        if (count == 0) {
            CHECK((view == nullptr || view->doc_count() == 0));
        } else {
            REQUIRE(view != nullptr);
            CHECK(view->doc_count() == count);
        }
    }
    CHECK(tree.corpus_ids().size() == regs.size());
}

TEST_CASE("duplicate registers are rejected") {
    auto regs = planted().expected_registers;
    regs.push_back(regs.front());
    CHECK_THROWS_AS(build_index_tree(regs, IndexKind::Lexical, nullptr), IndexError);
}

TEST_CASE("lexical index saves deterministically and loads back") {
    TempDir a("idx-a");
    TempDir b("idx-b");
    const auto tree = build_index_tree(planted().expected_registers, IndexKind::Lexical, nullptr);
    const std::string sha_a = save_index(tree, a.path());
    const std::string sha_b = save_index(tree, b.path());
    CHECK(sha_a == sha_b);
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));

    const auto loaded = load_index(a.path());
    CHECK(loaded.views().size() == tree.views().size());
    CHECK(loaded.corpus_ids() == tree.corpus_ids());
    const Query query = tree.make_query("overall abstract summary", nullptr);
    for (const auto& [path, view] : tree.views()) {
        CHECK(loaded.find(path)->score(query) == view.score(query));
    }
    // Saving the loaded tree reproduces the same manifest.
    TempDir c("idx-c");
    CHECK(save_index(loaded, c.path()) == sha_a);
}

TEST_CASE("dense index round-trips") {
    TempDir dir("idx-dense");
    ContentModel model(nullptr, std::make_shared<FixtureEmbedder>(24));
    const auto tree = build_index_tree(planted().expected_registers, IndexKind::Dense, &model);
    save_index(tree, dir.path());
    const auto loaded = load_index(dir.path());
    CHECK(loaded.kind() == IndexKind::Dense);
    const Query query = tree.make_query("overall abstract summary", &model);
    for (const auto& [path, view] : tree.views()) {
        CHECK(loaded.find(path)->score(query) == view.score(query));
    }
}

TEST_CASE("corrupted view files are detected") {
    TempDir dir("idx-corrupt");
    save_index(build_index_tree(planted().expected_registers, IndexKind::Lexical, nullptr), dir.path());
    std::filesystem::path victim;
    for (const auto& entry : std::filesystem::directory_iterator(dir.path())) {
        if (entry.path().extension() == ".bin") {
            victim = entry.path();
            break;
        }
    }
    REQUIRE_FALSE(victim.empty());
    std::string bytes = slurp(victim);
    bytes[bytes.size() / 2] ^= 0x5a;
    std::ofstream(victim, std::ios::binary | std::ios::trunc) << bytes;
    CHECK_THROWS_AS(load_index(dir.path()), CorruptionError);
}

TEST_CASE("format version mismatches are reported as such") {
    TempDir dir("idx-version");
    save_index(build_index_tree(planted().expected_registers, IndexKind::Lexical, nullptr), dir.path());
    auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    manifest["format_version"] = kIndexFormatVersion + 1;
    std::ofstream(dir / "manifest.json", std::ios::trunc) << manifest.dump(2);
    CHECK_THROWS_AS(load_index(dir.path()), FormatVersionError);
}

TEST_CASE("missing index directory") {
    CHECK_THROWS_AS(load_index("/nonexistent/registerdex/index"), IndexError);
}
