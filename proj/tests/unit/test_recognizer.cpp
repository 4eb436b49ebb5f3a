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

#include <random>

#include <json.hpp>

#include "registerdex/error.hpp"
#include "registerdex/recognizer.hpp"

using namespace registerdex;

namespace {

class CannedTransport final : public HttpTransport {
public:
    explicit CannedTransport(HttpResponse reply, bool fail = false) : reply_(std::move(reply)), fail_(fail) {}
    HttpResponse post(const HttpRequest& request) override {
        ++calls;
        last_body = request.body;
        if (fail_) {
            throw TransportError("connection refused");
        }
        return reply_;
    }
    int calls = 0;
    std::string last_body;

private:
    HttpResponse reply_;
    bool fail_;
};

RetryPolicy no_wait() {
    RetryPolicy policy;
    policy.max_retries = 0;
    policy.initial_backoff = std::chrono::milliseconds(0);
    return policy;
}

std::vector<std::string> path_strings(const RecognizerOutput& out) {
    std::vector<std::string> paths;
    for (const auto& view : out.views) {
        paths.push_back(view.path.str());
    }
    return paths;
}

const NodePath kOperation{"Abstract", "Method", "Implementation", "Operation"};
const NodePath kModule{"Abstract", "Method", "Implementation", "Module"};
const NodePath kDataset{"Abstract", "Experiment", "Dataset"};

}  // namespace

TEST_CASE("hierarchical reward hand values") {
    CHECK(hierarchical_reward(kOperation, kOperation) == 2.0);
    CHECK(hierarchical_reward(kOperation, kModule) == doctest::Approx(1.5));
    CHECK(hierarchical_reward(kOperation, kDataset) == doctest::Approx(7.0 / 12.0));
    CHECK(hierarchical_reward(kOperation, kModule) > hierarchical_reward(kOperation, kDataset));
    CHECK(path_overlap(kOperation, kDataset) == 1);
    CHECK(hierarchical_reward(NodePath{"X"}, NodePath{"Y"}) == 0.0);
}

TEST_CASE("hierarchical reward bounds, symmetry and equality on random pairs") {
    std::vector<NodePath> paths;
    for (const auto* schema : default_schemas().schemas()) {
        for (const auto& p : all_paths(*schema)) {
            paths.push_back(p);
        }
    }
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const NodePath& a = paths[rng() % paths.size()];
        const NodePath& b = paths[rng() % paths.size()];
        const double r = hierarchical_reward(a, b);
        CHECK(r >= 0.0);
        CHECK(r <= 2.0);
        CHECK((r == 2.0) == (a == b));
        CHECK(r == hierarchical_reward(b, a));
    }
}

TEST_CASE("extending a correct prefix with wrong segments lowers the reward") {
    const NodePath golden = kOperation;
    const NodePath prefix{"Abstract", "Method"};
    const NodePath longer{"Abstract", "Method", "Wrong"};
    const NodePath longest{"Abstract", "Method", "Wrong", "Worse"};
    CHECK(hierarchical_reward(golden, prefix) > hierarchical_reward(golden, longer));
    CHECK(hierarchical_reward(golden, longer) > hierarchical_reward(golden, longest));
}

TEST_CASE("view catalog dedupes shared paths") {
    const ViewCatalog catalog(default_schemas());
    std::set<std::string> seen;
    for (const auto& c : catalog.candidates()) {
        CHECK(seen.insert(c.view.path.str()).second);
        CHECK(validate_path(default_schemas().at(c.view.schema_type), c.view.path));
    }
    // Abstract exists in every schema; the first paper type owns it.
    const auto root = catalog.resolve("Abstract");
    REQUIRE(root);
    CHECK(root->schema_type == PaperType::AlgorithmInnovation);
    CHECK_FALSE(catalog.resolve("Abstract/Nowhere"));
}

TEST_CASE("lexical recognizer finds each node from its own name and description") {
    const ViewCatalog catalog(default_schemas());
    LexicalRecognizer recognizer(catalog);
    size_t hits = 0;
    for (const auto& candidate : catalog.candidates()) {
        const std::string query = split_camel_case(candidate.view.path.back()) + " " + candidate.texts.front();
        const auto out = identify(query, 1, recognizer, catalog);
        REQUIRE(out.views.size() == 1);
        CAPTURE(candidate.view.path.str());
        CAPTURE(out.views[0].path.str());
        hits += out.views[0].path == candidate.view.path ? 1 : 0;
    }
    CHECK(hits == catalog.candidates().size());
}

TEST_CASE("identify output is valid, unique, bounded and deterministic") {
    const ViewCatalog catalog(default_schemas());
    LexicalRecognizer recognizer(catalog);
    for (const char* query : {"training operation of the generator", "dataset statistics", "main theorem proof",
                              "zzz unmatched words"}) {
        const auto a = identify(query, 5, recognizer, catalog);
        const auto b = lexical_identify(query, 5, catalog);
        CHECK(path_strings(a) == path_strings(b));
        CHECK(a.views.size() == 5);
        std::set<std::string> unique;
        for (const auto& view : a.views) {
            CHECK(catalog.trie().accepts(view.path));
            unique.insert(view.path.str());
        }
        CHECK(unique.size() == a.views.size());
        for (size_t i = 1; i < a.scores.size(); ++i) {
            CHECK(a.scores[i] <= a.scores[i - 1]);
        }
    }
    CHECK_THROWS_AS(identify("  ", 5, recognizer, catalog), std::invalid_argument);
    CHECK_THROWS_AS(identify("query", 0, recognizer, catalog), std::invalid_argument);
}

TEST_CASE("depth filter restricts the candidates") {
    const ViewCatalog catalog(default_schemas());
    LexicalRecognizer recognizer(catalog);
    const ViewFilter filter{{2}};
    const auto out = identify("method implementation details", 5, recognizer, catalog, filter);
    REQUIRE_FALSE(out.views.empty());
    for (const auto& view : out.views) {
        CHECK(view.path.depth() == 2);
    }
}

TEST_CASE("remote recognizer drops invalid paths and backfills from lexical") {
    const ViewCatalog catalog(default_schemas());
    auto transport = std::make_shared<CannedTransport>(HttpResponse{
        200, R"({"paths":["Abstract/Method","Abstract/Bogus","Abstract/Experiment","Abstract/Method/Implementation","Abstract/Experiment/Dataset"]})"});
    RemoteRecognizer remote("http://recognizer.invalid/identify", transport, catalog, true, no_wait());
    const auto out = identify("dataset", 5, remote, catalog);
    const auto paths = path_strings(out);
    REQUIRE(paths.size() == 5);
    CHECK(paths[0] == "Abstract/Method");
    CHECK(paths[1] == "Abstract/Experiment");
    CHECK(paths[2] == "Abstract/Method/Implementation");
    CHECK(paths[3] == "Abstract/Experiment/Dataset");
    CHECK(std::count(paths.begin(), paths.end(), paths[4]) == 1);
    CHECK_FALSE(remote.warnings().empty());
    CHECK(nlohmann::json::parse(transport->last_body) == nlohmann::json{{"query", "dataset"}, {"k", 5}});
}

TEST_CASE("remote recognizer replays a valid answer verbatim") {
    const ViewCatalog catalog(default_schemas());
    auto transport = std::make_shared<CannedTransport>(
        HttpResponse{200, R"({"paths":["Abstract/Experiment/Dataset","Abstract","Abstract/Method"]})"});
    RemoteRecognizer remote("http://recognizer.invalid/identify", transport, catalog, true, no_wait());
    CHECK(path_strings(identify("anything", 3, remote, catalog)) ==
          std::vector<std::string>{"Abstract/Experiment/Dataset", "Abstract", "Abstract/Method"});
}

TEST_CASE("remote recognizer with only invalid paths equals lexical") {
    const ViewCatalog catalog(default_schemas());
    auto transport = std::make_shared<CannedTransport>(HttpResponse{200, R"({"paths":["X/Y","Nope"]})"});
    RemoteRecognizer remote("http://recognizer.invalid/identify", transport, catalog, true, no_wait());
    CHECK(path_strings(identify("dataset statistics", 5, remote, catalog)) ==
          path_strings(lexical_identify("dataset statistics", 5, catalog)));
}

TEST_CASE("remote recognizer transport failure falls back or throws per config") {
    const ViewCatalog catalog(default_schemas());
    auto transport = std::make_shared<CannedTransport>(HttpResponse{}, true);
    RemoteRecognizer lenient("http://recognizer.invalid/identify", transport, catalog, true, no_wait());
    CHECK(path_strings(identify("proof", 5, lenient, catalog)) == path_strings(lexical_identify("proof", 5, catalog)));
    RemoteRecognizer strict("http://recognizer.invalid/identify", transport, catalog, false, no_wait());
    CHECK_THROWS_AS(identify("proof", 5, strict, catalog), TransportError);
}

TEST_CASE("oracle, adversarial and random recognizers") {
    const ViewCatalog catalog(default_schemas());
    const View golden{kOperation, PaperType::AlgorithmInnovation};
    std::map<std::string, View, std::less<>> table{{"q", golden}};

    OracleRecognizer oracle(table, catalog);
    CHECK(identify("q", 5, oracle, catalog).views.front() == golden);
    // Under a depth filter the golden view projects onto its ancestor.
    const auto projected = identify("q", 5, oracle, catalog, ViewFilter{{2}});
    REQUIRE_FALSE(projected.views.empty());
    CHECK(projected.views.front().path == NodePath{"Abstract", "Method"});

    AdversarialRecognizer adversarial(table, catalog);
    for (const auto& view : identify("q", 5, adversarial, catalog).views) {
        CHECK(view.path != golden.path);
        CHECK(hierarchical_reward(golden.path, view.path) <= hierarchical_reward(golden.path, kDataset));
    }

    RandomRecognizer random_a(catalog, 3);
    RandomRecognizer random_b(catalog, 3);
    const auto ra = identify("q", 5, random_a, catalog);
    CHECK(ra.views.size() == 5);
    CHECK(path_strings(ra) == path_strings(identify("q", 5, random_b, catalog)));
}

TEST_CASE("recognizer evaluation") {
    const ViewCatalog catalog(default_schemas());
    std::vector<RecognizerExample> examples{
        {"q1", View{kOperation, PaperType::AlgorithmInnovation}, std::nullopt},
        {"q2", View{kDataset, PaperType::AlgorithmInnovation}, std::nullopt},
    };

    SUBCASE("perfect predictions") {
        std::map<std::string, View, std::less<>> table{{"q1", examples[0].golden_view}, {"q2", examples[1].golden_view}};
        OracleRecognizer oracle(table, catalog);
        const auto report = evaluate_recognizer(examples, oracle, catalog, 5);
        CHECK(report.top1_accuracy == 1.0);
        CHECK(report.mean_reward == 2.0);
    }
    SUBCASE("a fixed wrong sibling") {
        FixedRecognizer fixed({View{kModule, PaperType::AlgorithmInnovation}});
        const auto report = evaluate_recognizer(examples, fixed, catalog, 5);
        CHECK(report.top1_accuracy == 0.0);
        // Hand sum: 1.5 for q1, 1/4 + 1/3 for q2.
        CHECK(report.mean_reward == doctest::Approx((1.5 + 7.0 / 12.0) / 2.0));
        CHECK(report.confusion.at(kOperation.str()).at(kModule.str()) == 1);
    }
    SUBCASE("nothing survives validation") {
        FixedRecognizer fixed({View{NodePath{"Bogus"}, PaperType::AlgorithmInnovation}});
        const auto report = evaluate_recognizer(examples, fixed, catalog, 5);
        CHECK(report.top1_accuracy == 0.0);
        CHECK(report.mean_reward == 0.0);
    }
}
