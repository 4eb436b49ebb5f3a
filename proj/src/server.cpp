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

#include "registerdex/server.hpp"

#include <csignal>
#include <pthread.h>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "registerdex/error.hpp"

namespace registerdex {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr size_t kSnippetBytes = 240;

ApiReply error_reply(int status, std::string message) {
    return {status, ordered_json{{"error", std::move(message)}}};
}

std::optional<size_t> positive_field(const json& body, const char* key) {
    const auto it = body.find(key);
    if (it == body.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_number_integer() || it->get<std::int64_t>() < 1) {
        throw std::invalid_argument(std::string("\"") + key + "\" must be a positive integer");
    }
    return it->get<size_t>();
}

// Parses a JSON request body and pulls out the mandatory query.
std::pair<json, std::string> parse_query_body(std::string_view body) {
    json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        throw std::invalid_argument("request body must be a JSON object");
    }
    const auto it = parsed.find("query");
    if (it == parsed.end() || !it->is_string() || trim(it->get<std::string>()).empty()) {
        throw std::invalid_argument("\"query\" must be a non-empty string");
    }
    std::string query = it->get<std::string>();
    return {std::move(parsed), std::move(query)};
}

template <typename Fn>
ApiReply guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        return error_reply(400, e.what());
    } catch (const json::exception& e) {
        return error_reply(400, e.what());
    } catch (const std::exception& e) {
        spdlog::error("request failed: {}", e.what());
        return error_reply(500, e.what());
    }
}

}  // namespace

SearchApi::SearchApi(std::shared_ptr<const Engine> engine) : engine_(std::move(engine)) {}

ApiReply SearchApi::search(std::string_view body) const {
    return guarded([&] {
        const auto [request, query] = parse_query_body(body);
        const auto k = positive_field(request, "k");
        const auto m = positive_field(request, "m");
        if (const auto it = request.find("kind"); it != request.end() && !it->is_null()) {
            const IndexKind kind = parse_index_kind(it->get<std::string>());
            if (kind != engine_->tree().kind()) {
                throw std::invalid_argument("the loaded index is " + std::string(to_string(engine_->tree().kind())) +
                                            ", not " + std::string(to_string(kind)));
            }
        }
        std::vector<std::string> views;
        if (const auto it = request.find("views"); it != request.end() && !it->is_null()) {
            views = it->get<std::vector<std::string>>();
        }
        const SearchResult result = engine_->search(query, k, m, views);

        ordered_json reply;
        reply["query"] = result.query;
        reply["manual"] = result.manual_views;
        ordered_json used = ordered_json::array();
        for (size_t i = 0; i < result.views_used.views.size(); ++i) {
            const View& view = result.views_used.views[i];
            ordered_json entry{{"path", view.path.str()}, {"schema_type", std::string(to_string(view.schema_type))}};
            if (i < result.views_used.scores.size()) {
                entry["score"] = result.views_used.scores[i];
            }
            used.push_back(std::move(entry));
        }
        reply["views_used"] = std::move(used);
        ordered_json results = ordered_json::array();
        for (const auto& doc : result.ranked) {
            const PaperDoc* paper = engine_->paper(doc.paper_id);
            const HierarchicalRegister* reg = engine_->paper_register(doc.paper_id);
            std::string snippet;
            if (reg != nullptr && doc.best_view) {
                if (const auto it = reg->contents.find(doc.best_view->path); it != reg->contents.end()) {
                    snippet = std::string(utf8_truncate(it->second, kSnippetBytes));
                }
            }
            if (snippet.empty() && paper != nullptr) {
                snippet = std::string(utf8_truncate(paper->abstract, kSnippetBytes));
            }
            ordered_json entry;
            entry["paper_id"] = doc.paper_id;
            entry["title"] = paper != nullptr ? paper->title : std::string{};
            entry["score"] = doc.score;
            entry["best_view"] = doc.best_view ? ordered_json(doc.best_view->path.str()) : ordered_json(nullptr);
            entry["snippet"] = std::move(snippet);
            results.push_back(std::move(entry));
        }
        reply["results"] = std::move(results);
        return ApiReply{200, std::move(reply)};
    });
}

ApiReply SearchApi::identify(std::string_view body) const {
    return guarded([&] {
        const auto [request, query] = parse_query_body(body);
        const auto out = engine_->identify(query, positive_field(request, "k"));
        ordered_json paths = ordered_json::array();
        for (const auto& view : out.views) {
            paths.push_back(view.path.str());
        }
        return ApiReply{200, ordered_json{{"views", std::move(paths)}}};
    });
}

ApiReply SearchApi::paper_register(std::string_view paper_id) const {
    return guarded([&] {
        const HierarchicalRegister* reg = engine_->paper_register(paper_id);
        if (reg == nullptr) {
            return error_reply(404, "no register for paper '" + std::string(paper_id) + "'");
        }
        return ApiReply{200, to_json(*reg)};
    });
}

ApiReply SearchApi::schema(std::string_view paper_type) const {
    return guarded([&] {
        const auto type = parse_paper_type(paper_type);
        if (!type || !engine_->schemas().contains(*type)) {
            return error_reply(404, "unknown paper type '" + std::string(paper_type) + "'");
        }
        return ApiReply{200, ordered_json::parse(dump_schema(engine_->schemas().at(*type)))};
    });
}

ApiReply SearchApi::healthz() const {
    return ApiReply{200, ordered_json{{"status", "ok"},
                                      {"index_kind", std::string(to_string(engine_->tree().kind()))},
                                      {"papers", engine_->tree().corpus_ids().size()},
                                      {"views", engine_->tree().views().size()}}};
}

// ---------------------------------------------------------------------------

HttpService::HttpService(std::shared_ptr<const Engine> engine)
    : api_(std::move(engine)), server_(std::make_unique<httplib::Server>()) {
    const auto send = [](httplib::Response& res, const ApiReply& reply) {
        res.status = reply.status;
        res.set_content(reply.body.dump(), "application/json");
    };
    server_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                  {"Access-Control-Allow-Headers", "Content-Type"},
                                  {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server_->Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server_->Post("/search", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, api_.search(req.body));
    });
    server_->Post("/identify", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, api_.identify(req.body));
    });
    server_->Get(R"(/paper/([^/]+)/register)", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, api_.paper_register(req.matches[1].str()));
    });
    server_->Get(R"(/schema/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, api_.schema(req.matches[1].str()));
    });
    server_->Get("/healthz", [this, send](const httplib::Request&, httplib::Response& res) {
        send(res, api_.healthz());
    });
}

HttpService::~HttpService() {
    stop();
}

int HttpService::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = server_->bind_to_any_port(host);
        if (bound < 0) {
            throw Error("cannot bind " + host + " to a free port");
        }
    } else if (!server_->bind_to_port(host, port)) {
        throw Error("cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

void HttpService::stop() {
    if (thread_.joinable()) {
        server_->stop();
        thread_.join();
    }
}

void serve(const ServiceConfig& config) {
    config.validate();
    // Signals are taken synchronously by this thread; block them before any
    // worker thread exists so every thread inherits the mask.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    auto engine = Engine::open(config);
    HttpService service(engine);
    const int port = service.start(config.host, config.port);
    spdlog::info("serving {} views over {} papers on http://{}:{}", engine->tree().views().size(),
                 engine->tree().corpus_ids().size(), config.host, port);
    int received = 0;
    sigwait(&signals, &received);
    spdlog::info("signal {} received, shutting down", received);
    service.stop();
}

}  // namespace registerdex
