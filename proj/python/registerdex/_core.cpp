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

// Python bindings. Structured results cross the boundary as JSON text and are
// decoded by the package's __init__.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "registerdex/engine.hpp"
#include "registerdex/eval.hpp"
#include "registerdex/planted.hpp"
#include "registerdex/recognizer.hpp"
#include "registerdex/text.hpp"
#include "registerdex/transport.hpp"

namespace py = pybind11;
using namespace registerdex;
using nlohmann::ordered_json;

namespace {

ServiceConfig config_of(const std::string& config_json) {
    ServiceConfig config = config_from_json(nlohmann::json::parse(config_json));
    config.validate();
    return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hierarchical register search engine";

    // Translators run newest first, so the base class is registered first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

    m.def("tokenize", [](const std::string& text, bool remove_stopwords) {
        return tokenize(text, {.remove_stopwords = remove_stopwords});
    }, py::arg("text"), py::arg("remove_stopwords") = false);

    m.def("hierarchical_reward", [](const std::string& golden, const std::string& predicted) {
        return hierarchical_reward(NodePath::parse(golden), NodePath::parse(predicted));
    }, py::arg("golden"), py::arg("predicted"));

    m.def("recall_at_k", [](const std::vector<std::string>& ranked, const std::set<std::string>& relevant, size_t k) {
        return recall_at_k(ranked, relevant, k);
    }, py::arg("ranked"), py::arg("relevant"), py::arg("k"));

    m.def("network_call_count", &network_call_count);

    m.def("generate_planted", [](const std::filesystem::path& out_dir, size_t papers, std::uint64_t seed, size_t queries_per_tag) {
        PlantedOptions options;
        options.papers = papers;
        options.seed = seed;
        options.queries_per_tag = queries_per_tag;
        const auto corpus = generate_planted_corpus(default_schemas(), options);
        write_planted_corpus(corpus, out_dir);
        return corpus.queries.size();
    }, py::arg("out_dir"), py::arg("papers") = 240, py::arg("seed") = 42, py::arg("queries_per_tag") = 60);

    m.def("build_registers", [](const std::string& config_json) {
        const auto summary = cmd_build_registers(config_of(config_json));
        return ordered_json{{"papers", summary.papers},
                            {"built", summary.built},
                            {"reused", summary.reused},
                            {"generator_calls", summary.generator_calls}}
            .dump();
    });

    m.def("build_index", [](const std::string& config_json) {
        const auto summary = cmd_build_index(config_of(config_json));
        return ordered_json{{"registers", summary.registers},
                            {"doc_counts", summary.doc_counts},
                            {"manifest_sha256", summary.manifest_sha256}}
            .dump();
    });

    m.def("evaluate", [](const std::string& config_json, const std::vector<std::string>& systems,
                         const std::string& dataset, const std::string& out_dir) {
        return cmd_eval(config_of(config_json), systems, dataset, out_dir).to_json().dump();
    });

    py::class_<Engine, std::shared_ptr<Engine>>(m, "Engine")
        .def(py::init([](const std::string& config_json) { return Engine::open(config_of(config_json)); }))
        .def("search", [](const Engine& engine, const std::string& query, std::optional<size_t> k,
                          std::optional<size_t> m, const std::vector<std::string>& views) {
            SearchResult result;
            {
                py::gil_scoped_release release;
                result = engine.search(query, k, m, views);
            }
            return to_json(result).dump();
        }, py::arg("query"), py::arg("k") = py::none(), py::arg("m") = py::none(),
             py::arg("views") = std::vector<std::string>{})
        .def("identify", [](const Engine& engine, const std::string& query, std::optional<size_t> k) {
            std::vector<std::string> paths;
            for (const auto& view : engine.identify(query, k).views) {
                paths.push_back(view.path.str());
            }
            return paths;
        }, py::arg("query"), py::arg("k") = py::none());
}
