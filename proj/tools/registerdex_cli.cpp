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

// registerdex: build registers and indexes, search, evaluate, serve.

#include <cstdio>
#include <functional>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "registerdex/engine.hpp"
#include "registerdex/error.hpp"
#include "registerdex/planted.hpp"
#include "registerdex/server.hpp"

using namespace registerdex;
using nlohmann::json;

namespace {

// Options that map onto ServiceConfig keys. Only flags the user actually
// passed end up in the flag layer, so lower layers are not overridden by
// CLI defaults.
class ConfigFlags {
public:
    template <typename T>
    void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        auto value = std::make_shared<T>();
        CLI::Option* option = app->add_option(flag, *value, help);
        collectors_.push_back([option, value, key](json& out) {
            if (option->count() > 0) {
                out[key] = *value;
            }
        });
    }

    void add_flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        auto value = std::make_shared<bool>(false);
        CLI::Option* option = app->add_flag(flag, *value, help);
        collectors_.push_back([option, value, key](json& out) {
            if (option->count() > 0) {
                out[key] = *value;
            }
        });
    }

    json collect() const {
        json out = json::object();
        for (const auto& collect : collectors_) {
            collect(out);
        }
        return out;
    }

private:
    std::vector<std::function<void(json&)>> collectors_;
};

void add_common(CLI::App* app, ConfigFlags& flags) {
    flags.add<std::string>(app, "--corpus", "corpus", "Corpus file (one JSON paper per line)");
    flags.add<std::string>(app, "--schema-dir", "schema_dir", "Directory of schema JSON files");
    flags.add<std::string>(app, "--store", "register_store", "Register store file");
    flags.add<std::string>(app, "--index", "index_dir", "Index directory");
    flags.add<std::string>(app, "--transcripts", "transcripts", "Model transcript file (replay/record)");
    flags.add<std::string>(app, "--kind", "index_kind", "Index kind: lexical or dense");
    flags.add<std::int64_t>(app, "--k", "k", "Number of views per query");
    flags.add<std::int64_t>(app, "--m", "m", "Number of papers returned");
    flags.add<std::string>(app, "--recognizer", "recognizer", "View recognizer: lexical or remote");
    flags.add<std::string>(app, "--recognizer-url", "recognizer_url", "Remote recognizer endpoint");
    flags.add<std::string>(app, "--model-backend", "model_backend", "replay, record, remote or extractive");
    flags.add<std::string>(app, "--embedder", "embedder", "fixture, replay, record or remote");
    flags.add<std::int64_t>(app, "--embedding-dim", "embedding_dim", "Embedding dimension");
    flags.add<std::string>(app, "--on-extract-error", "on_extract_error", "fail or blank");
    flags.add<std::int64_t>(app, "--seed", "seed", "Random seed");
    flags.add<std::int64_t>(app, "--parallel", "parallel_papers", "Papers built concurrently");
    flags.add_flag(app, "--normalize", "normalize", "Min-max normalize per-view scores before fusion");
    flags.add_flag(app, "--stopwords", "remove_stopwords", "Drop English stopwords when tokenizing");
    flags.add_flag(app, "--enrich", "enrich", "Append the best-matching source paragraph to register nodes");
}

void print_search(const SearchResult& result, const std::string& format) {
    if (format == "json") {
        std::cout << to_json(result).dump(2) << "\n";
        return;
    }
    std::cout << (result.manual_views ? "views (manual):" : "views:") << "\n";
    for (size_t i = 0; i < result.views_used.views.size(); ++i) {
        std::cout << "  " << result.views_used.views[i].path.str();
        if (i < result.views_used.scores.size()) {
            std::printf("  (%.4f)", result.views_used.scores[i]);
            std::fflush(stdout);
        }
        std::cout << "\n";
    }
    std::cout << "results:\n";
    for (size_t i = 0; i < result.ranked.size(); ++i) {
        const auto& doc = result.ranked[i];
        char line[64];
        std::snprintf(line, sizeof line, "%3zu. %.6f  ", i + 1, doc.score);
        std::cout << line << doc.paper_id << "  [" << (doc.best_view ? doc.best_view->path.str() : "-") << "]\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("registerdex");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);

    CLI::App app{"Hierarchical register search engine"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_file;
    bool verbose = false;
    app.add_option("--config", config_file, "JSON config file (overrides REGISTERDEX_CONFIG)");
    app.add_flag("-v,--verbose", verbose, "Log progress and per-stage timings");
    ConfigFlags flags;
    add_common(&app, flags);

    auto* build_registers = app.add_subcommand("build-registers", "Extract a register for every paper in the corpus");
    auto* build_index = app.add_subcommand("build-index", "Build the per-view index tree from the register store");

    auto* search = app.add_subcommand("search", "Search the index");
    std::string query;
    std::vector<std::string> views;
    std::string format = "text";
    search->add_option("query", query, "Query text")->required();
    search->add_option("--views", views, "Comma-separated view paths; skips the recognizer")->delimiter(',');
    search->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

    auto* identify = app.add_subcommand("identify", "Print the views recognized for a query");
    identify->add_option("query", query, "Query text")->required();

    auto* eval = app.add_subcommand("eval", "Run a recall benchmark");
    std::vector<std::string> systems;
    std::string dataset;
    std::string out_dir;
    eval->add_option("--systems", systems, "Comma-separated systems, e.g. register,abstract,chunk512:max")
        ->delimiter(',');
    eval->add_option("--dataset", dataset, "Eval set file")->required();
    eval->add_option("--out", out_dir, "Output directory for report.json, report.txt, timings.json");

    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP search service");
    flags.add<std::string>(serve_cmd, "--host", "host", "Bind address");
    flags.add<std::int64_t>(serve_cmd, "--port", "port", "Port (0 picks a free one)");

    auto* planted = app.add_subcommand("generate-planted", "Write a synthetic corpus with planted markers");
    PlantedOptions planted_options;
    std::string planted_dir;
    bool single_type = false;
    bool declared = false;
    planted->add_option("--out", planted_dir, "Output directory")->required();
    planted->add_option("--papers", planted_options.papers, "Number of papers");
    planted->add_option("--queries-per-tag", planted_options.queries_per_tag, "Queries per granularity tag");
    planted->add_option("--blank-leaf-probability", planted_options.blank_leaf_probability, "Chance a leaf is empty");
    planted->add_flag("--single-type", single_type, "Only AlgorithmInnovation papers");
    planted->add_flag("--declared-types", declared, "Declare paper types instead of shipping classification replies");

    CLI11_PARSE(app, argc, argv);
    if (verbose) {
        spdlog::set_level(spdlog::level::info);
    }

    try {
        if (planted->parsed()) {
            const json flag_layer = flags.collect();
            planted_options.seed = flag_layer.value("seed", std::uint64_t{42});
            planted_options.mixed_types = !single_type;
            planted_options.classify_via_model = !declared;
            const ServiceConfig config = resolve_config(flag_layer, config_file);
            const auto corpus = generate_planted_corpus(schemas_for(config), planted_options);
            write_planted_corpus(corpus, planted_dir);
            std::cout << "papers: " << corpus.docs.size() << "\ntranscripts: " << corpus.transcripts.size()
                      << "\nqueries: " << corpus.queries.size() << "\n";
            return 0;
        }

        const ServiceConfig config = resolve_config(flags.collect(), config_file);
        if (build_registers->parsed()) {
            const auto summary = cmd_build_registers(config);
            std::cout << "papers: " << summary.papers << "\nbuilt: " << summary.built
                      << "\nreused: " << summary.reused << "\nmodel calls: " << summary.generator_calls
                      << "\nwarnings: " << summary.warnings.size() << "\n";
        } else if (build_index->parsed()) {
            const auto summary = cmd_build_index(config);
            std::cout << "registers: " << summary.registers << "\nviews: " << summary.doc_counts.size() << "\n";
            for (const auto& [path, count] : summary.doc_counts) {
                std::cout << "  " << path << "\t" << count << "\n";
            }
            std::cout << "manifest sha256: " << summary.manifest_sha256 << "\n";
        } else if (search->parsed()) {
            print_search(cmd_search(config, query, views), format);
        } else if (identify->parsed()) {
            for (const auto& view : cmd_identify(config, query).views) {
                std::cout << view.path.str() << "\n";
            }
        } else if (eval->parsed()) {
            const auto report = cmd_eval(config, systems, dataset, out_dir);
            std::cout << report.to_table();
            for (const auto& s : report.systems) {
                if (s.failure) {
                    return 1;
                }
            }
        } else if (serve_cmd->parsed()) {
            if (!verbose) {
                spdlog::set_level(spdlog::level::info);
            }
            serve(config);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
