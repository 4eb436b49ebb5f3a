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

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace registerdex {

enum class PaperType {
    AlgorithmInnovation,
    BenchmarkConstruction,
    MechanismExploration,
    Survey,
    TheoryProof,
};

inline constexpr std::array<PaperType, 5> kAllPaperTypes = {
    PaperType::AlgorithmInnovation, PaperType::BenchmarkConstruction,
    PaperType::MechanismExploration, PaperType::Survey, PaperType::TheoryProof,
};

/// Canonical identifier, e.g. "AlgorithmInnovation". Used in files and URLs.
std::string_view to_string(PaperType type);

/// Human label as used by the classification prompt, e.g. "Algorithm Innovation".
std::string_view display_label(PaperType type);

/// Parses a label leniently: case, whitespace, punctuation and the
/// "Survey and Review" long form are all accepted. Returns nullopt when no
/// single variant matches.
std::optional<PaperType> parse_paper_type(std::string_view label);

}  // namespace registerdex
