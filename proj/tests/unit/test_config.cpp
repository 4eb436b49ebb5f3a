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

#include "registerdex/config.hpp"
#include "registerdex/error.hpp"
#include "test_support.hpp"

using namespace registerdex;
using registerdex::testing::TempDir;

namespace {

EnvLookup fake_env(std::map<std::string, std::string> vars) {
    return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
        const auto it = vars.find(name);
        if (it == vars.end()) {
            return std::nullopt;
        }
        return it->second;
    };
}

}  // namespace

TEST_CASE("defaults") {
    const auto config = resolve_config(nlohmann::json::object(), {}, fake_env({}));
    CHECK(config.k == 5);
    CHECK(config.m == 10);
    CHECK(config.index_kind == IndexKind::Lexical);
    CHECK(config.model_backend == "replay");
}

TEST_CASE("file < environment < flags") {
    TempDir dir("config");
    std::ofstream(dir / "c.json") << R"({"k": 3, "m": 7, "seed": 9, "normalize": true})";
    const auto file_only = resolve_config(nlohmann::json::object(), dir / "c.json", fake_env({}));
    CHECK(file_only.k == 3);
    CHECK(file_only.normalize);

    const auto env = fake_env({{"REGISTERDEX_K", "4"}, {"REGISTERDEX_NORMALIZE", "false"}});
    const auto with_env = resolve_config(nlohmann::json::object(), dir / "c.json", env);
    CHECK(with_env.k == 4);
    CHECK(with_env.m == 7);
    CHECK_FALSE(with_env.normalize);

    const auto with_flags = resolve_config({{"k", 2}}, dir / "c.json", env);
    CHECK(with_flags.k == 2);
    CHECK(with_flags.seed == 9);

    const auto via_env_file =
        resolve_config(nlohmann::json::object(), {}, fake_env({{"REGISTERDEX_CONFIG", (dir / "c.json").string()}}));
    CHECK(via_env_file.m == 7);
}

TEST_CASE("bad configuration is rejected") {
    CHECK_THROWS_AS(resolve_config({{"k", 0}}, {}, fake_env({})), ConfigError);
    CHECK_THROWS_AS(resolve_config({{"m", -1}}, {}, fake_env({})), ConfigError);
    CHECK_THROWS_AS(resolve_config({{"colour", "blue"}}, {}, fake_env({})), ConfigError);
    CHECK_THROWS_AS(resolve_config({{"k", "five"}}, {}, fake_env({})), ConfigError);
    CHECK_THROWS_AS(resolve_config({{"index_kind", "sparse"}}, {}, fake_env({})), ConfigError);
    CHECK_THROWS_AS(resolve_config({{"recognizer", "remote"}}, {}, fake_env({})), ConfigError);
    CHECK_THROWS_AS(resolve_config(nlohmann::json::object(), {}, fake_env({{"REGISTERDEX_K", "x"}})), ConfigError);
    CHECK_THROWS_AS(resolve_config(nlohmann::json::object(), "/nonexistent/config.json", fake_env({})), ConfigError);
}

TEST_CASE("fingerprint tracks the effective configuration") {
    const auto a = resolve_config(nlohmann::json::object(), {}, fake_env({}));
    const auto b = resolve_config({{"k", 3}}, {}, fake_env({}));
    CHECK(a.fingerprint() == resolve_config(nlohmann::json::object(), {}, fake_env({})).fingerprint());
    CHECK(a.fingerprint() != b.fingerprint());
    CHECK(config_from_json(nlohmann::json::parse(a.to_json().dump())).to_json() == a.to_json());
}
