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

// Acceptance suite: one PASS/FAIL line per primary criterion. Runs offline on
// replayed model output and fixture embeddings; exit status is non-zero if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <unistd.h>

#include "registerdex/engine.hpp"
#include "registerdex/eval.hpp"
#include "registerdex/planted.hpp"
#include "registerdex/retrieval.hpp"

using namespace registerdex;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
    char buffer[512];
    std::snprintf(buffer, sizeof buffer, format, args...);
    return buffer;
}

std::string slurp(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// --- BM25 ------------------------------------------------------------------

Outcome bm25_oracle() {
    const auto start = Clock::now();
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const size_t vocab = 1 + rng() % 30;
        const size_t n_docs = 1 + rng() % 20;
        std::vector<std::string> ids;
        std::vector<std::vector<std::string>> docs(n_docs);
        for (size_t d = 0; d < n_docs; ++d) {
            ids.push_back("d" + std::to_string(d));
            for (size_t t = 0, len = 1 + rng() % 30; t < len; ++t) {
                docs[d].push_back("w" + std::to_string(rng() % vocab));
            }
        }
        std::string query;
        std::vector<std::string> query_tokens;
        for (size_t t = 0, q = 1 + rng() % 5; t < q; ++t) {
            query_tokens.push_back("w" + std::to_string(rng() % (vocab + 2)));
            query += query_tokens.back() + " ";
        }
        const ViewIndex view(NodePath{"Abstract"}, LexicalIndex::build(ids, docs));
        const auto got = lexical_scores(view, query);

        double avgdl = 0.0;
        for (const auto& d : docs) {
            avgdl += static_cast<double>(d.size());
        }
        avgdl /= static_cast<double>(n_docs);
        for (size_t d = 0; d < n_docs; ++d) {
            double expected = 0.0;
            for (const auto& term : query_tokens) {
                double df = 0.0;
                for (const auto& other : docs) {
                    df += std::find(other.begin(), other.end(), term) != other.end() ? 1.0 : 0.0;
                }
                const double n = static_cast<double>(n_docs);
                const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
                const double tf = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), term));
                const double len = static_cast<double>(docs[d].size());
                expected += idf * tf * 2.5 / (tf + 1.5 * (0.25 + 0.75 * len / avgdl));
            }
            worst = std::max(worst, std::abs(got.at(ids[d]) - expected));
        }
    }
    const double elapsed = seconds_since(start);
    return {worst < 1e-9 && elapsed < 5.0, fmt("max |diff| %.2e over 50 corpora, %.3f s", worst, elapsed)};
}

// --- Dense -------------------------------------------------------------------

Outcome dense_oracle() {
    std::mt19937_64 rng(77);
    double worst = 0.0;
    size_t order_mismatches = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const size_t dim = 4 + rng() % 60;
        FixtureEmbedder embedder(dim, rng());
        const size_t n_docs = 1 + rng() % 20;
        std::vector<std::string> ids;
        std::vector<std::vector<double>> vectors;
        for (size_t d = 0; d < n_docs; ++d) {
            ids.push_back("d" + std::to_string(d));
            vectors.push_back(embedder.embed("doc " + std::to_string(rng() % 1000) + " t" + std::to_string(d)).values);
        }
        const auto query = embedder.embed("query " + std::to_string(trial));
        const ViewIndex view(NodePath{"Abstract"}, DenseIndex::build(ids, vectors));
        const auto got = dense_scores(view, query);

        std::vector<std::pair<double, std::string>> brute;
        for (size_t d = 0; d < n_docs; ++d) {
            double dot = 0.0, na = 0.0, nb = 0.0;
            for (size_t i = 0; i < dim; ++i) {
                dot += vectors[d][i] * query.values[i];
                na += vectors[d][i] * vectors[d][i];
                nb += query.values[i] * query.values[i];
            }
            const double cos = (na == 0.0 || nb == 0.0) ? 0.0 : dot / std::sqrt(na * nb);
            worst = std::max(worst, std::abs(got.at(ids[d]) - cos));
            brute.emplace_back(cos, ids[d]);
        }
        const auto by_rank = [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        };
        std::sort(brute.begin(), brute.end(), by_rank);

        std::map<std::string, ScoredDoc> fused;
        for (const auto& [id, score] : got) {
            fused[id] = ScoredDoc{id, score, std::nullopt, {}};
        }
        const auto ranked = rank_top(fused, n_docs);
        for (size_t i = 0; i < n_docs; ++i) {
            order_mismatches += ranked[i].paper_id == brute[i].second ? 0 : 1;
        }
    }
    return {worst < 1e-9 && order_mismatches == 0,
            fmt("max |diff| %.2e, %zu ranking mismatches over 50 corpora", worst, order_mismatches)};
}

// --- Reward ------------------------------------------------------------------

Outcome reward() {
    const NodePath operation{"Abstract", "Method", "Implementation", "Operation"};
    const NodePath module{"Abstract", "Method", "Implementation", "Module"};
    const NodePath dataset{"Abstract", "Experiment", "Dataset"};
    const double exact = hierarchical_reward(operation, operation);
    const double close = hierarchical_reward(operation, module);
    const double far = hierarchical_reward(operation, dataset);
    bool ok = exact == 2.0 && std::abs(close - 1.5) < 1e-12 && std::abs(far - 7.0 / 12.0) < 1e-12 && close > far;

    std::vector<NodePath> paths;
    for (const auto* schema : default_schemas().schemas()) {
        const auto all = all_paths(*schema);
        paths.insert(paths.end(), all.begin(), all.end());
    }
    std::mt19937_64 rng(5);
    size_t violations = 0;
    for (int i = 0; i < 1000; ++i) {
        const NodePath& a = paths[rng() % paths.size()];
        // Half the draws compare a path with itself so both sides of the iff are exercised.
        const NodePath& b = (i % 2 == 0) ? a : paths[rng() % paths.size()];
        const double r = hierarchical_reward(a, b);
        violations += (r >= 0.0 && r <= 2.0 && ((r == 2.0) == (a == b))) ? 0 : 1;
    }
    ok = ok && violations == 0;
    return {ok, fmt("exact %.4f, module %.4f > dataset %.4f, %zu violations in 1000 pairs", exact, close, far,
                    violations)};
}

// --- Planted corpus ------------------------------------------------------------

struct PlantedBench {
    PlantedCorpus corpus;
    std::vector<HierarchicalRegister> registers;
    std::optional<IndexTree> tree;
    std::unique_ptr<ViewCatalog> catalog;
    double build_seconds = 0.0;

    BenchContext context() const {
        BenchContext ctx;
        ctx.tree = &*tree;
        ctx.corpus = corpus.docs;
        ctx.catalog = catalog.get();
        ctx.seed = 42;
        return ctx;
    }
};

// Builds the registers through the real builder from replayed model output.
PlantedBench make_planted() {
    const auto start = Clock::now();
    PlantedBench bench;
    bench.corpus = generate_planted_corpus(default_schemas(), PlantedOptions{.papers = 240, .seed = 42});
    auto store = std::make_shared<TranscriptStore>();
    for (const auto& t : bench.corpus.transcripts) {
        store->add(t);
    }
    ContentModel model(std::make_shared<ReplayGenerator>(store), nullptr);
    bench.registers = build_corpus_registers(bench.corpus.docs, default_schemas(), model);
    bench.tree.emplace(build_index_tree(bench.registers, IndexKind::Lexical, nullptr));
    bench.catalog = std::make_unique<ViewCatalog>(default_schemas());
    bench.build_seconds = seconds_since(start);
    return bench;
}

Outcome fusion_monotonicity(const PlantedBench& bench) {
    std::vector<View> all;
    for (const auto& [path, index] : bench.tree->views()) {
        all.push_back(*bench.catalog->resolve(path));
    }
    std::mt19937_64 rng(99);
    size_t violations = 0;
    size_t compared = 0;
    for (int draw = 0; draw < 200; ++draw) {
        const auto& q = bench.corpus.queries[rng() % bench.corpus.queries.size()];
        std::vector<View> big;
        std::vector<View> small;
        for (const auto& view : all) {
            const auto coin = rng() % 4;
            if (coin >= 1) {
                big.push_back(view);
            }
            if (coin == 3) {
                small.push_back(view);
            }
        }
        const Query query = bench.tree->make_query(q.query, nullptr);
        const auto fused_big = fuse_scores(query, lookup(*bench.tree, big));
        for (const auto& [id, doc] : fuse_scores(query, lookup(*bench.tree, small))) {
            ++compared;
            const auto it = fused_big.find(id);
            violations += (it != fused_big.end() && doc.score <= it->second.score) ? 0 : 1;
        }
    }
    return {violations == 0 && compared > 0,
            fmt("%zu violations over 200 draws (%zu paper comparisons)", violations, compared)};
}

const std::vector<std::string> kTags = {"coarse", "fine-1", "fine-2", "fine-3"};

Outcome trend(const PlantedBench& bench) {
    const auto start = Clock::now();
    const std::vector<SystemSpec> systems{SystemSpec::parse("register:oracle"), SystemSpec::parse("abstract")};
    const auto report = run_benchmark(bench.corpus.queries, systems, bench.context(), "planted");
    const auto& reg = report.system("register:oracle");
    const auto& abs = report.system("abstract");
    bool ok = !reg.failure && !abs.failure && bench.corpus.docs.size() >= 200;
    std::string detail;
    for (const auto& tag : kTags) {
        const double r = reg.cell(tag).recall_at_5;
        const double a = abs.cell(tag).recall_at_5;
        ok = ok && r >= a;
        detail += fmt("%s %.3f vs %.3f; ", tag.c_str(), r, a);
    }
    ok = ok && reg.cell("fine-3").recall_at_5 > abs.cell("fine-3").recall_at_5;
    const double elapsed = bench.build_seconds + seconds_since(start);
    ok = ok && elapsed < 60.0;
    return {ok, detail + fmt("%zu papers, %.2f s", bench.corpus.docs.size(), elapsed)};
}

Outcome ablation(const PlantedBench& bench) {
    const SystemSpec base = SystemSpec::parse("register:oracle");
    const auto ctx = bench.context();
    const auto full = run_benchmark(bench.corpus.queries, std::vector<SystemSpec>{base}, ctx).systems.at(0);
    const auto top = run_layer_ablation(bench.corpus.queries, ctx, {1}, base).systems.at(0);
    const auto deep = run_layer_ablation(bench.corpus.queries, ctx, {4}, base).systems.at(0);
    const auto r5 = [](const SystemReport& s, const char* tag) { return s.cell(tag).recall_at_5; };

    const double fine_full = r5(full, "fine-3");
    const double fine_top = r5(top, "fine-3");
    const double coarse_drop = r5(full, "coarse") - r5(deep, "coarse");
    const double fine_drop = fine_full - r5(deep, "fine-3");
    const bool ok = !top.failure && !deep.failure && fine_top < fine_full && coarse_drop > fine_drop;
    return {ok, fmt("layer-1 only: fine-3 %.3f -> %.3f; deepest only: coarse drop %.3f > fine-3 drop %.3f", fine_full,
                    fine_top, coarse_drop, fine_drop)};
}

Outcome recognizer_quality(const PlantedBench& bench) {
    const std::vector<SystemSpec> systems{SystemSpec::parse("register:adversarial"), SystemSpec::parse("register:random"),
                                          SystemSpec::parse("register:oracle")};
    const auto report = run_benchmark(bench.corpus.queries, systems, bench.context());
    const double adversarial = report.systems[0].cell("all").recall_at_5;
    const double random = report.systems[1].cell("all").recall_at_5;
    const double oracle = report.systems[2].cell("all").recall_at_5;
    const bool ok = !report.systems[0].failure && adversarial <= random && random <= oracle;
    return {ok, fmt("recall@5 adversarial %.3f <= random %.3f <= oracle %.3f", adversarial, random, oracle)};
}

// --- Determinism -----------------------------------------------------------------

struct PipelineArtifacts {
    std::string registers;
    std::string manifest;
    std::string report;
};

PipelineArtifacts run_pipeline(const std::filesystem::path& dir, const PlantedCorpus& corpus) {
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    write_planted_corpus(corpus, dir);
    ServiceConfig config;
    config.corpus = dir / "corpus.jsonl";
    config.transcripts = dir / "transcripts.jsonl";
    config.register_store = dir / "registers.jsonl";
    config.index_dir = dir / "index";
    cmd_build_registers(config);
    cmd_build_index(config);
    cmd_eval(config, {}, dir / "eval.jsonl", dir / "report");
    return {slurp(dir / "registers.jsonl"), slurp(dir / "index" / "manifest.json"),
            slurp(dir / "report" / "report.json")};
}

Outcome determinism() {
    const auto corpus = generate_planted_corpus(default_schemas(), PlantedOptions{.papers = 60, .seed = 7});
    const auto dir = std::filesystem::temp_directory_path() / ("registerdex-acceptance-" + std::to_string(::getpid()));
    const auto first = run_pipeline(dir, corpus);
    const auto second = run_pipeline(dir, corpus);
    std::filesystem::remove_all(dir);
    const bool same_registers = !first.registers.empty() && first.registers == second.registers;
    const bool same_manifest = !first.manifest.empty() && first.manifest == second.manifest;
    const bool same_report = !first.report.empty() && first.report == second.report;
    return {same_registers && same_manifest && same_report,
            fmt("registers %s, manifest %s, report %s", same_registers ? "identical" : "DIFFER",
                same_manifest ? "identical" : "DIFFER", same_report ? "identical" : "DIFFER")};
}

}  // namespace

int main() {
    int failures = 0;
    const auto report = [&](const char* name, const std::function<Outcome()>& check) {
        Outcome outcome;
        try {
            outcome = check();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        failures += outcome.pass ? 0 : 1;
        std::printf("%s  %-28s %s\n", outcome.pass ? "PASS" : "FAIL", name, outcome.detail.c_str());
        std::fflush(stdout);
    };

    report("bm25-oracle-equivalence", bm25_oracle);
    report("dense-oracle-equivalence", dense_oracle);
    report("hierarchical-reward", reward);

    std::optional<PlantedBench> bench;
    try {
        bench.emplace(make_planted());
    } catch (const std::exception& e) {
        std::printf("planted corpus build failed: %s\n", e.what());
    }
    const auto with_bench = [&](Outcome (*fn)(const PlantedBench&)) {
        return [&bench, fn] { return bench ? fn(*bench) : Outcome{false, "planted corpus unavailable"}; };
    };
    report("fusion-monotonicity", with_bench(fusion_monotonicity));
    report("trend-vs-abstract", with_bench(trend));
    report("layer-ablation-direction", with_bench(ablation));
    report("recognizer-quality-order", with_bench(recognizer_quality));
    report("end-to-end-determinism", determinism);
    report("offline-guarantee", [] {
        const auto calls = network_call_count();
        return Outcome{calls == 0, fmt("%llu network calls across the suite", static_cast<unsigned long long>(calls))};
    });

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
