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

#include "registerdex/transport.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "registerdex/error.hpp"

namespace registerdex {

namespace {

std::atomic<std::uint64_t> g_network_calls{0};

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw TransportError("malformed URL '" + url + "'");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable(int status) {
    return status == 429 || status >= 500;
}

}  // namespace

std::uint64_t network_call_count() {
    return g_network_calls.load();
}

HttpResponse HttplibTransport::post(const HttpRequest& request) {
    g_network_calls.fetch_add(1);
    const SplitUrl url = split_url(request.url);
    httplib::Client client(url.origin);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    httplib::Headers headers;
    for (const auto& [name, value] : request.headers) {
        headers.emplace(name, value);
    }
    auto result = client.Post(url.path, headers, request.body, "application/json");
    if (!result) {
        throw TransportError("POST " + request.url + " failed: " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
}

HttpResponse post_with_retry(HttpTransport& transport, HttpRequest request, const RetryPolicy& policy) {
    request.timeout = policy.timeout;
    auto backoff = policy.initial_backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff = std::chrono::milliseconds(
                static_cast<long long>(static_cast<double>(backoff.count()) * policy.backoff_multiplier));
        }
        HttpResponse response;
        try {
            response = transport.post(request);
        } catch (const TransportError& e) {
            last_error = e.what();
            continue;
        }
        if (response.status >= 200 && response.status < 300) {
            return response;
        }
        last_error = "HTTP " + std::to_string(response.status) + " from " + request.url;
        if (!retryable(response.status)) {
            throw TransportError(last_error);
        }
    }
    throw TransportError(last_error + " (after " + std::to_string(policy.max_retries) + " retries)");
}

std::optional<RemoteEndpoint> RemoteEndpoint::from_env(const std::string& prefix) {
    const char* url = std::getenv((prefix + "_URL").c_str());
    if (url == nullptr || *url == '\0') {
        return std::nullopt;
    }
    RemoteEndpoint endpoint;
    endpoint.base_url = url;
    if (const char* key = std::getenv((prefix + "_KEY").c_str())) {
        endpoint.api_key = key;
    }
    return endpoint;
}

std::string RemoteEndpoint::url_for(std::string_view route) const {
    std::string url = base_url;
    while (!url.empty() && url.back() == '/') {
        url.pop_back();
    }
    return url + std::string(route);
}

std::vector<std::pair<std::string, std::string>> RemoteEndpoint::headers() const {
    std::vector<std::pair<std::string, std::string>> out;
    if (!api_key.empty()) {
        out.emplace_back("Authorization", "Bearer " + api_key);
    }
    return out;
}

InFlightLimiter::InFlightLimiter(int max_in_flight) : slots_(std::max(1, std::min(max_in_flight, 1024))) {}

}  // namespace registerdex
