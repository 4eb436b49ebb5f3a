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

#include <cmath>
#include <map>
#include <random>

#include "registerdex/bm25.hpp"
#include "registerdex/content_model.hpp"
#include "registerdex/error.hpp"
#include "registerdex/index_tree.hpp"

using namespace registerdex;

namespace {

// Direct evaluation of the Okapi formula over raw token lists.
std::vector<double> okapi(const std::vector<std::vector<std::string>>& docs, const std::vector<std::string>& query,
                          double k1 = 1.5, double b = 0.75) {
    const double n = static_cast<double>(docs.size());
    double total = 0;
    for (const auto& d : docs) {
        total += static_cast<double>(d.size());
    }
    const double avgdl = total / n;
    std::vector<double> out(docs.size(), 0.0);
    for (const auto& term : query) {
        double df = 0;
        for (const auto& d : docs) {
            df += std::count(d.begin(), d.end(), term) > 0 ? 1 : 0;
        }
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (size_t i = 0; i < docs.size(); ++i) {
            const double tf = static_cast<double>(std::count(docs[i].begin(), docs[i].end(), term));
            const double len = static_cast<double>(docs[i].size());
            out[i] += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avgdl));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("bm25 toy corpus against hand values") {
    const auto index = LexicalIndex::build({"d0", "d1", "d2"}, {{"a", "b"}, {"a", "a", "b"}, {"c"}});
    const std::vector<std::string> query{"a"};
    const auto scores = index.score(query);
    const double idf = std::log(1.6);
    CHECK(index.average_length() == doctest::Approx(2.0));
    CHECK(index.doc_frequency("a") == 2);
    CHECK(scores[0] == doctest::Approx(idf).epsilon(1e-12));
    CHECK(scores[1] == doctest::Approx(idf * 5.0 / 4.0625).epsilon(1e-12));
    CHECK(scores[2] == 0.0);
}

TEST_CASE("bm25 repeated query tokens count once per occurrence") {
    const auto index = LexicalIndex::build({"d0", "d1"}, {{"x", "y"}, {"y"}});
    const std::vector<std::string> once{"x"};
    const std::vector<std::string> twice{"x", "x"};
    CHECK(index.score(twice)[0] == doctest::Approx(2 * index.score(once)[0]));
}

TEST_CASE("bm25 matches the direct formula on random corpora") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const size_t vocab = 1 + rng() % 30;
        const size_t n_docs = 1 + rng() % 20;
        std::vector<std::vector<std::string>> docs(n_docs);
        std::vector<std::string> ids;
        for (size_t d = 0; d < n_docs; ++d) {
            ids.push_back("doc" + std::to_string(d));
            const size_t len = 1 + rng() % 25;
            for (size_t t = 0; t < len; ++t) {
                docs[d].push_back("t" + std::to_string(rng() % vocab));
            }
        }
        std::vector<std::string> query;
        for (size_t t = 0, q = 1 + rng() % 6; t < q; ++t) {
            query.push_back("t" + std::to_string(rng() % (vocab + 3)));
        }
        const auto expected = okapi(docs, query);
        const auto got = LexicalIndex::build(ids, docs).score(query);
        REQUIRE(got.size() == expected.size());
        for (size_t i = 0; i < got.size(); ++i) {
            CHECK(std::abs(got[i] - expected[i]) < 1e-9);
        }
    }
}

TEST_CASE("dense index scores are cosines") {
    FixtureEmbedder embedder(16);
    std::vector<std::vector<double>> vectors;
    for (const char* text : {"alpha beta", "beta gamma", "delta"}) {
        vectors.push_back(embedder.embed(text).values);
    }
    const auto index = DenseIndex::build({"a", "b", "c"}, vectors);
    const auto query = embedder.embed("beta");
    const auto scores = index.score(query.values);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(scores[i] == doctest::Approx(cosine(vectors[i], query.values)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(DenseIndex::build({"a", "b"}, {{1.0, 0.0}, {1.0}}), IndexError);
    const std::vector<double> short_query{1.0};
    CHECK_THROWS_AS(index.score(short_query), IndexError);
}

TEST_CASE("fixture embedder is deterministic and normalized") {
    FixtureEmbedder a(32);
    FixtureEmbedder b(32);
    const auto va = a.embed("hierarchical index tree");
    CHECK(va.values == b.embed("hierarchical index tree").values);
    double norm = 0;
    for (double v : va.values) {
        norm += v * v;
    }
    CHECK(norm == doctest::Approx(1.0));
    CHECK(FixtureEmbedder(32, 1).embed("x").values != a.embed("x").values);
}

TEST_CASE("lexical_scores covers every indexed paper") {
    ViewIndex view(NodePath{"Abstract"}, LexicalIndex::build({"p1", "p2"}, {{"graph", "neural"}, {"tree"}}));
    const auto scores = lexical_scores(view, "Graph networks");
    CHECK(scores.size() == 2);
    CHECK(scores.at("p1") > 0.0);
    CHECK(scores.at("p2") == 0.0);
}
