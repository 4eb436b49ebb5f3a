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

#include "registerdex/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "registerdex/error.hpp"
#include "registerdex/hashing.hpp"
#include "registerdex/planted.hpp"

namespace registerdex {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<EvalQuery> load_eval_queries(const std::filesystem::path& file, const std::vector<std::string>* corpus_ids) {
    std::ifstream in(file);
    if (!in) {
        throw DataError("cannot open eval set " + file.string());
    }
    std::set<std::string> known;
    if (corpus_ids != nullptr) {
        known.insert(corpus_ids->begin(), corpus_ids->end());
    }
    std::vector<EvalQuery> queries;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const std::string where = file.string() + ":" + std::to_string(line_no) + ": ";
        try {
            const json record = json::parse(line);
            EvalQuery q;
            q.query = record.at("query").get<std::string>();
            if (trim(q.query).empty()) {
                throw DataError("empty query");
            }
            const json& ids = record.contains("relevant_ids") ? record.at("relevant_ids") : record.at("corpusids");
            for (const auto& id : ids) {
                // LitSearch stores corpus ids as integers.
                q.relevant_ids.push_back(id.is_string() ? id.get<std::string>() : id.dump());
            }
            std::sort(q.relevant_ids.begin(), q.relevant_ids.end());
            q.relevant_ids.erase(std::unique(q.relevant_ids.begin(), q.relevant_ids.end()), q.relevant_ids.end());
            if (q.relevant_ids.empty()) {
                throw DataError("empty relevant set");
            }
            if (corpus_ids != nullptr) {
                for (const auto& id : q.relevant_ids) {
                    if (!known.contains(id)) {
                        throw DataError("relevant id '" + id + "' is not in the corpus");
                    }
                }
            }
            if (const auto it = record.find("granularity_tag"); it != record.end() && it->is_string()) {
                q.granularity_tag = it->get<std::string>();
            }
            if (const auto it = record.find("golden_view"); it != record.end() && it->is_string()) {
                q.golden_view = it->get<std::string>();
            }
            if (const auto it = record.find("schema_type"); it != record.end() && it->is_string()) {
                q.schema_type = parse_paper_type(it->get<std::string>());
                if (!q.schema_type) {
                    throw DataError("unknown schema_type '" + it->get<std::string>() + "'");
                }
            }
            queries.push_back(std::move(q));
        } catch (const json::exception& e) {
            throw DataError(where + e.what());
        } catch (const DataError& e) {
            throw DataError(where + e.what());
        }
    }
    return queries;
}

void write_eval_queries(const std::filesystem::path& file, std::span<const EvalQuery> queries) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) {
        throw DataError("cannot write eval set " + file.string());
    }
    for (const auto& q : queries) {
        ordered_json record;
        record["query"] = q.query;
        record["relevant_ids"] = q.relevant_ids;
        if (!q.granularity_tag.empty()) {
            record["granularity_tag"] = q.granularity_tag;
        }
        if (q.golden_view) {
            record["golden_view"] = *q.golden_view;
        }
        if (q.schema_type) {
            record["schema_type"] = std::string(to_string(*q.schema_type));
        }
        out << record.dump() << '\n';
    }
}

double recall_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant, size_t k) {
    if (k == 0) {
        throw std::invalid_argument("k must be positive");
    }
    if (relevant.empty()) {
        throw std::invalid_argument("empty relevant set");
    }
    std::set<std::string_view> hits;
    for (size_t i = 0; i < ranked.size() && i < k; ++i) {
        if (relevant.contains(ranked[i])) {
            hits.insert(ranked[i]);
        }
    }
    return static_cast<double>(hits.size()) / static_cast<double>(relevant.size());
}

std::string_view to_string(RecognizerChoice choice) {
    switch (choice) {
        case RecognizerChoice::Lexical: return "lexical";
        case RecognizerChoice::Oracle: return "oracle";
        case RecognizerChoice::Random: return "random";
        case RecognizerChoice::Adversarial: return "adversarial";
        case RecognizerChoice::Remote: return "remote";
    }
    return "lexical";
}

SystemSpec SystemSpec::parse(std::string_view text) {
    SystemSpec spec;
    spec.name = std::string(trim(text));
    std::string_view rest = spec.name;
    if (rest.empty()) {
        throw std::invalid_argument("empty system name");
    }
    if (rest.starts_with("register")) {
        spec.type = SystemType::Register;
        rest.remove_prefix(std::string_view("register").size());
        std::string_view depths;
        if (const auto at = rest.find('@'); at != std::string_view::npos) {
            depths = rest.substr(at + 1);
            rest = rest.substr(0, at);
        }
        if (!rest.empty()) {
            if (rest.front() != ':') {
                throw std::invalid_argument("bad system '" + spec.name + "'");
            }
            rest.remove_prefix(1);
            bool found = false;
            for (auto choice : {RecognizerChoice::Lexical, RecognizerChoice::Oracle, RecognizerChoice::Random,
                                RecognizerChoice::Adversarial, RecognizerChoice::Remote}) {
                if (rest == to_string(choice)) {
                    spec.recognizer = choice;
                    found = true;
                }
            }
            if (!found) {
                throw std::invalid_argument("unknown recognizer '" + std::string(rest) + "' in system '" + spec.name +
                                            "'");
            }
        }
        while (!depths.empty()) {
            const auto comma = depths.find(',');
            const std::string item(depths.substr(0, comma));
            size_t used = 0;
            int depth = 0;
            try {
                depth = std::stoi(item, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != item.size() || depth < 1) {
                throw std::invalid_argument("bad depth '" + item + "' in system '" + spec.name + "'");
            }
            spec.filter.depths.insert(static_cast<size_t>(depth));
            depths = comma == std::string_view::npos ? std::string_view{} : depths.substr(comma + 1);
        }
        return spec;
    }
    spec.type = SystemType::Baseline;
    std::string_view mode = rest;
    if (const auto colon = rest.find(':'); colon != std::string_view::npos) {
        mode = rest.substr(0, colon);
        spec.fusion = parse_part_fusion(rest.substr(colon + 1));
    }
    spec.mode = parse_baseline_mode(mode);
    return spec;
}

ordered_json SystemSpec::to_json() const {
    ordered_json out;
    out["name"] = name;
    if (type == SystemType::Register) {
        out["type"] = "register";
        out["recognizer"] = std::string(registerdex::to_string(recognizer));
        out["k"] = k;
        out["depths"] = filter.depths;
        out["normalize"] = normalize;
    } else {
        out["type"] = "baseline";
        out["mode"] = std::string(registerdex::to_string(mode));
        out["fusion"] = std::string(registerdex::to_string(fusion));
    }
    return out;
}

const RecallCell& SystemReport::cell(const std::string& tag) const {
    const auto it = by_tag.find(tag);
    if (it == by_tag.end()) {
        throw std::out_of_range("system " + name + " has no results for tag '" + tag + "'");
    }
    return it->second;
}

const SystemReport& BenchReport::system(std::string_view name) const {
    for (const auto& s : systems) {
        if (s.name == name) {
            return s;
        }
    }
    throw std::out_of_range("no system '" + std::string(name) + "' in report");
}

ordered_json BenchReport::to_json(bool include_runtime) const {
    ordered_json out;
    out["dataset"] = dataset;
    out["seed"] = seed;
    out["config_fingerprint"] = config_fingerprint;
    out["config"] = config;
    ordered_json list = ordered_json::array();
    for (const auto& s : systems) {
        ordered_json entry;
        entry["name"] = s.name;
        entry["config"] = s.config;
        if (s.failure) {
            entry["failure"] = *s.failure;
        }
        ordered_json tags = ordered_json::object();
        for (const auto& [tag, cell] : s.by_tag) {
            tags[tag] = {{"queries", cell.queries}, {"recall@5", cell.recall_at_5}, {"recall@10", cell.recall_at_10}};
        }
        entry["by_tag"] = std::move(tags);
        if (include_runtime) {
            entry["mean_latency_ms"] = s.mean_latency_ms;
        }
        list.push_back(std::move(entry));
    }
    out["systems"] = std::move(list);
    return out;
}

std::string BenchReport::to_table() const {
    std::set<std::string> tags;
    size_t width = 6;
    for (const auto& s : systems) {
        width = std::max(width, s.name.size());
        for (const auto& [tag, cell] : s.by_tag) {
            if (tag != "all") {
                tags.insert(tag);
            }
        }
    }
    std::vector<std::string> columns(tags.begin(), tags.end());
    columns.push_back("all");

    std::ostringstream out;
    out << "dataset: " << dataset << "  seed: " << seed << "  config: " << config_fingerprint << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(width), "system");
    out << buf;
    for (const auto& c : columns) {
        std::snprintf(buf, sizeof buf, " | %-15s", c.c_str());
        out << buf;
    }
    out << "\n" << std::string(width, ' ');
    for (size_t i = 0; i < columns.size(); ++i) {
        out << " | R@5    R@10   ";
    }
    out << "\n";
    for (const auto& s : systems) {
        std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(width), s.name.c_str());
        out << buf;
        if (s.failure) {
            out << " | FAILED: " << *s.failure << "\n";
            continue;
        }
        for (const auto& c : columns) {
            const auto it = s.by_tag.find(c);
            if (it == s.by_tag.end()) {
                out << " | -      -      ";
            } else {
                std::snprintf(buf, sizeof buf, " | %-6.4f %-6.4f", it->second.recall_at_5, it->second.recall_at_10);
                out << buf;
            }
        }
        out << "\n";
    }
    return out.str();
}

namespace {

constexpr size_t kBenchM = 10;

// Runs one system over every query; returns the top-M ids per query.
class SystemRunner {
public:
    virtual ~SystemRunner() = default;
    virtual std::vector<std::string> run(const EvalQuery& query) = 0;
};

std::vector<std::string> ids_of(const SearchResult& result) {
    std::vector<std::string> ids;
    for (const auto& doc : result.ranked) {
        ids.push_back(doc.paper_id);
    }
    return ids;
}

class RegisterRunner final : public SystemRunner {
public:
    RegisterRunner(const SystemSpec& spec, const BenchContext& ctx, std::unique_ptr<Recognizer> recognizer)
        : ctx_(ctx), recognizer_(std::move(recognizer)) {
        options_.k = spec.k;
        options_.m = kBenchM;
        options_.kind = ctx.kind;
        options_.fusion.normalize = spec.normalize;
        options_.filter = spec.filter;
    }
    std::vector<std::string> run(const EvalQuery& query) override {
        return ids_of(search(query.query, *ctx_.tree, *recognizer_, *ctx_.catalog, options_, ctx_.model));
    }

private:
    const BenchContext& ctx_;
    std::unique_ptr<Recognizer> recognizer_;
    SearchOptions options_;
};

class BaselineRunner final : public SystemRunner {
public:
    BaselineRunner(const SystemSpec& spec, const BenchContext& ctx)
        : fusion_(spec.fusion),
          model_(ctx.model),
          index_(ctx.corpus, spec.mode, ctx.kind, ctx.model, ctx.tree ? ctx.tree->options() : IndexOptions{}) {}
    std::vector<std::string> run(const EvalQuery& query) override {
        return ids_of(index_.search(query.query, fusion_, kBenchM, model_));
    }

private:
    PartFusion fusion_;
    ContentModel* model_;
    BaselineIndex index_;
};

std::unique_ptr<SystemRunner> make_runner(const SystemSpec& spec, std::span<const EvalQuery> queries,
                                          const BenchContext& ctx) {
    if (spec.type == SystemType::Baseline) {
        if (ctx.corpus.empty()) {
            throw IndexError("baseline needs the corpus");
        }
        return std::make_unique<BaselineRunner>(spec, ctx);
    }
    if (ctx.tree == nullptr || ctx.catalog == nullptr) {
        throw IndexError("register system needs a built index tree");
    }
    std::unique_ptr<Recognizer> recognizer;
    switch (spec.recognizer) {
        case RecognizerChoice::Lexical: recognizer = std::make_unique<LexicalRecognizer>(*ctx.catalog); break;
        case RecognizerChoice::Oracle:
            recognizer = std::make_unique<OracleRecognizer>(golden_views(queries, *ctx.catalog), *ctx.catalog);
            break;
        case RecognizerChoice::Adversarial:
            recognizer = std::make_unique<AdversarialRecognizer>(golden_views(queries, *ctx.catalog), *ctx.catalog);
            break;
        case RecognizerChoice::Random:
            recognizer = std::make_unique<RandomRecognizer>(*ctx.catalog, ctx.seed);
            break;
        case RecognizerChoice::Remote:
            if (ctx.remote_recognizer_url.empty() || !ctx.transport) {
                throw ConfigError("remote recognizer needs an endpoint URL");
            }
            recognizer = std::make_unique<RemoteRecognizer>(ctx.remote_recognizer_url, ctx.transport, *ctx.catalog);
            break;
    }
    return std::make_unique<RegisterRunner>(spec, ctx, std::move(recognizer));
}

SystemReport run_system(const SystemSpec& spec, std::span<const EvalQuery> queries, const BenchContext& ctx) {
    SystemReport report;
    report.name = spec.name;
    report.config = spec.to_json();
    std::unique_ptr<SystemRunner> runner;
    try {
        runner = make_runner(spec, queries, ctx);
    } catch (const std::exception& e) {
        report.failure = e.what();
        return report;
    }

    std::vector<std::vector<std::string>> ranked(queries.size());
    std::vector<double> latency_ms(queries.size(), 0.0);
    std::vector<std::exception_ptr> errors(queries.size());
    std::atomic<size_t> next{0};
    const auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < queries.size(); i = next.fetch_add(1)) {
            const auto start = std::chrono::steady_clock::now();
            try {
                ranked[i] = runner->run(queries[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
            latency_ms[i] =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }
    };
    const size_t threads = std::clamp<size_t>(ctx.parallel_queries, 1, std::max<size_t>(1, queries.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    for (size_t i = 0; i < queries.size(); ++i) {
        if (errors[i]) {
            try {
                std::rethrow_exception(errors[i]);
            } catch (const std::exception& e) {
                report.failure = "query " + std::to_string(i + 1) + ": " + e.what();
                return report;
            }
        }
    }

    // Assembly walks queries in input order, so the sums do not depend on
    // which worker finished first.
    struct Sum {
        size_t n = 0;
        double r5 = 0.0;
        double r10 = 0.0;
    };
    std::map<std::string, Sum> sums;
    double total_latency = 0.0;
    for (size_t i = 0; i < queries.size(); ++i) {
        const std::set<std::string> relevant(queries[i].relevant_ids.begin(), queries[i].relevant_ids.end());
        const double r5 = recall_at_k(ranked[i], relevant, 5);
        const double r10 = recall_at_k(ranked[i], relevant, 10);
        for (const std::string& tag : {queries[i].granularity_tag, std::string("all")}) {
            if (tag.empty()) {
                continue;
            }
            auto& sum = sums[tag];
            ++sum.n;
            sum.r5 += r5;
            sum.r10 += r10;
        }
        total_latency += latency_ms[i];
    }
    for (const auto& [tag, sum] : sums) {
        const auto n = static_cast<double>(sum.n);
        report.by_tag[tag] = {sum.n, sum.r5 / n, sum.r10 / n};
    }
    report.mean_latency_ms = queries.empty() ? 0.0 : total_latency / static_cast<double>(queries.size());
    return report;
}

}  // namespace

BenchReport run_benchmark(std::span<const EvalQuery> queries, std::span<const SystemSpec> systems,
                          const BenchContext& context, std::string dataset) {
    BenchReport report;
    report.dataset = std::move(dataset);
    report.seed = context.seed;
    report.config = context.config;
    report.config["seed"] = context.seed;
    report.config_fingerprint = sha256_hex(report.config.dump()).substr(0, 16);
    for (const auto& spec : systems) {
        report.systems.push_back(run_system(spec, queries, context));
    }
    return report;
}

BenchReport run_layer_ablation(std::span<const EvalQuery> queries, const BenchContext& context,
                               const std::set<size_t>& layers_kept, SystemSpec base, std::string dataset) {
    if (layers_kept.empty()) {
        throw std::invalid_argument("layer ablation needs at least one layer");
    }
    if (base.type != SystemType::Register) {
        throw std::invalid_argument("layer ablation applies to register systems only");
    }
    base.filter.depths = layers_kept;
    std::string suffix;
    for (size_t depth : layers_kept) {
        suffix += (suffix.empty() ? "@" : ",") + std::to_string(depth);
    }
    if (const auto at = base.name.find('@'); at != std::string::npos) {
        base.name.resize(at);
    }
    base.name += suffix;
    return run_benchmark(queries, std::span<const SystemSpec>(&base, 1), context, std::move(dataset));
}

}  // namespace registerdex
