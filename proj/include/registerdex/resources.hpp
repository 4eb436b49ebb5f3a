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

#include <string_view>

// Files under data/ compiled into the library by CMake.
namespace registerdex::resources {

std::string_view schema_algorithm_innovation();
std::string_view schema_benchmark_construction();
std::string_view schema_mechanism_exploration();
std::string_view schema_survey();
std::string_view schema_theory_proof();

std::string_view prompt_classify();
std::string_view prompt_extract();
std::string_view prompt_aggregate();

}  // namespace registerdex::resources
