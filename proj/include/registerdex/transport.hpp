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

#include <chrono>
#include <cstdint>
#include <optional>
#include <semaphore>
#include <string>
#include <utility>
#include <vector>

namespace registerdex {

struct HttpRequest {
    std::string url;  // absolute, e.g. http://host:8000/v1/chat/completions
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
    std::chrono::milliseconds timeout{120000};
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// POST-only transport. Implementations throw TransportError when no HTTP
/// response was obtained at all; non-2xx statuses are returned, not thrown.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// Real network transport backed by cpp-httplib. Every call increments the
/// process-wide counter returned by network_call_count().
class HttplibTransport final : public HttpTransport {
public:
    HttpResponse post(const HttpRequest& request) override;
};

std::uint64_t network_call_count();

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{500};
    double backoff_multiplier = 2.0;
    std::chrono::milliseconds timeout{120000};
    int max_in_flight = 8;
};

/// Sends with at most `policy.max_retries` retries on transport errors, 429
/// and 5xx, sleeping initial_backoff * multiplier^attempt between tries.
/// Throws TransportError once retries are exhausted or on a 4xx reply.
HttpResponse post_with_retry(HttpTransport& transport, HttpRequest request, const RetryPolicy& policy);

/// Base URL + key of a remote service, read from <PREFIX>_URL / <PREFIX>_KEY.
struct RemoteEndpoint {
    std::string base_url;
    std::string api_key;
    std::string model;

    static std::optional<RemoteEndpoint> from_env(const std::string& prefix);
    std::string url_for(std::string_view route) const;
    std::vector<std::pair<std::string, std::string>> headers() const;
};

/// Counting semaphore sized at construction; RAII permit.
class InFlightLimiter {
public:
    explicit InFlightLimiter(int max_in_flight);

    class Permit {
    public:
        explicit Permit(InFlightLimiter& owner) : owner_(owner) { owner_.slots_.acquire(); }
        ~Permit() { owner_.slots_.release(); }
        Permit(const Permit&) = delete;
        Permit& operator=(const Permit&) = delete;

    private:
        InFlightLimiter& owner_;
    };

    Permit acquire() { return Permit(*this); }

private:
    std::counting_semaphore<1024> slots_;
};

}  // namespace registerdex
