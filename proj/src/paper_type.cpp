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

#include "registerdex/paper_type.hpp"

#include <cctype>
#include <string>

namespace registerdex {

std::string_view to_string(PaperType type) {
    switch (type) {
        case PaperType::AlgorithmInnovation: return "AlgorithmInnovation";
        case PaperType::BenchmarkConstruction: return "BenchmarkConstruction";
        case PaperType::MechanismExploration: return "MechanismExploration";
        case PaperType::Survey: return "Survey";
        case PaperType::TheoryProof: return "TheoryProof";
    }
    return "AlgorithmInnovation";
}

std::string_view display_label(PaperType type) {
    switch (type) {
        case PaperType::AlgorithmInnovation: return "Algorithm Innovation";
        case PaperType::BenchmarkConstruction: return "Benchmark Construction";
        case PaperType::MechanismExploration: return "Mechanism Exploration";
        case PaperType::Survey: return "Survey and Review";
        case PaperType::TheoryProof: return "Theory Proof";
    }
    return "Algorithm Innovation";
}

namespace {

std::string letters_only(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (unsigned char c : text) {
        if (std::isalpha(c)) {
            out.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    return out;
}

}  // namespace

std::optional<PaperType> parse_paper_type(std::string_view label) {
    const std::string key = letters_only(label);
    if (key.empty()) {
        return std::nullopt;
    }
    struct Alias {
        const char* key;
        PaperType type;
    };
    static constexpr Alias kAliases[] = {
        {"algorithminnovation", PaperType::AlgorithmInnovation},
        {"benchmarkconstruction", PaperType::BenchmarkConstruction},
        {"mechanismexploration", PaperType::MechanismExploration},
        {"survey", PaperType::Survey},
        {"surveyandreview", PaperType::Survey},
        {"review", PaperType::Survey},
        {"theoryproof", PaperType::TheoryProof},
    };
    for (const auto& alias : kAliases) {
        if (key == alias.key) {
            return alias.type;
        }
    }
    return std::nullopt;
}

}  // namespace registerdex
