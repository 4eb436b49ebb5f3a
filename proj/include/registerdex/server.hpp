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

#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include <json.hpp>

#include "registerdex/config.hpp"
#include "registerdex/engine.hpp"

namespace httplib {
class Server;
}

namespace registerdex {

struct ApiReply {
    int status = 200;
    nlohmann::ordered_json body;
};

/// Request handlers, independent of the HTTP layer.
///
///   POST /search   {query, k?, m?, kind?, views?} -> {views_used, manual, results: [...]}
///   POST /identify {query, k?}                    -> {views: [path]}
///   GET  /paper/{id}/register                     -> register record
///   GET  /schema/{paper_type}                     -> schema document
///   GET  /healthz                                 -> {status}
class SearchApi {
public:
    explicit SearchApi(std::shared_ptr<const Engine> engine);

    ApiReply search(std::string_view body) const;
    ApiReply identify(std::string_view body) const;
    ApiReply paper_register(std::string_view paper_id) const;
    ApiReply schema(std::string_view paper_type) const;
    ApiReply healthz() const;

private:
    std::shared_ptr<const Engine> engine_;
};

/// httplib server bound to a SearchApi.
class HttpService {
public:
    explicit HttpService(std::shared_ptr<const Engine> engine);
    ~HttpService();

    /// Binds (port 0 picks a free port) and starts serving on a background
    /// thread. Returns the bound port; throws Error if binding fails.
    int start(const std::string& host, int port);
    void stop();

private:
    SearchApi api_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

/// Validates config, loads the engine, serves until SIGINT/SIGTERM.
void serve(const ServiceConfig& config);

}  // namespace registerdex
