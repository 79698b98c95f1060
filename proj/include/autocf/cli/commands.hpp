/*
 * Copyright 2026 The AutoCF Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef AUTOCF_CLI_COMMANDS_HPP_
#define AUTOCF_CLI_COMMANDS_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "autocf/cfmodel/config.hpp"
#include "autocf/search/search.hpp"
#include "autocf/train/trainer.hpp"

namespace autocf {

// Declarative description of a search run.
struct RunConfig {
  std::filesystem::path dataset;  // snapshot written by `prepare`
  Task task = Task::kRating;
  SearchSpace space;
  SearchSpec search;
  std::filesystem::path output_dir = "autocf_out";
  std::uint64_t seed = 0;
};

// Reads the run config; relative paths resolve against the file's directory.
// The top-level seed feeds both the search and candidate training.
RunConfig LoadRunConfig(const std::filesystem::path& path);
RunConfig RunConfigFromJson(const nlohmann::json& j);

// Parses "8,16,32" or "0.001,0.01".
std::vector<std::size_t> ParseSizeList(const std::string& text);
std::vector<double> ParseRealList(const std::string& text);
// "8:2:2" -> ratios.
SplitRatios ParseRatios(const std::string& text);

// Top-n lines in the angle-bracket tuple format.
std::string FormatTopModels(const SearchHistory& history, std::size_t n);
// "evaluations best_so_far" per line.
std::string FormatCurve(const SearchHistory& history);

// Entry point shared by the executable and tests. args[0] is the program
// name. Returns the process exit status.
int RunCli(const std::vector<std::string>& args);
int RunCli(int argc, char** argv);

}  // namespace autocf

#endif  // AUTOCF_CLI_COMMANDS_HPP_
