/*
 * Copyright 2026 The vulntriage Authors.
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


#ifndef VULNTRIAGE_CLI_HPP_
#define VULNTRIAGE_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vulntriage/pipeline.hpp"

namespace vulntriage::cli {

inline constexpr const char* kOutEnv = "VULNTRIAGE_OUT";

// Command-line layer over the config tree. Precedence, lowest first:
// built-in defaults, --config file, --set assignments, named flags, and for
// the output directory the environment variable then --out.
struct Options {
  std::optional<std::string> config;
  std::vector<std::string> overrides;
  std::optional<std::string> data;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> split;
};

pipeline::RunConfig resolve(const Options& options);

// Each command writes under config.out, reports to log and returns the exit
// status: 0 iff its primary artifact was written.
int cmd_ingest(const pipeline::RunConfig& config, std::ostream& log);
int cmd_benchmark_features(const pipeline::RunConfig& config, std::ostream& log);
int cmd_benchmark_models(const pipeline::RunConfig& config, std::ostream& log);
int cmd_ensembles(const pipeline::RunConfig& config, std::ostream& log);
// output empty: <out>/predictions.csv.
int cmd_predict(const pipeline::RunConfig& config, const std::filesystem::path& bundle,
                const std::filesystem::path& input, const std::filesystem::path& output,
                std::ostream& log);

inline const std::vector<std::string> kPlots = {
    "keywords", "variance", "pca_scatter", "chi2_terms", "mi_terms", "roc", "activations"};
int cmd_plot(const pipeline::RunConfig& config, const std::string& which, std::ostream& log);

// Parses argv and dispatches; errors go to err with a nonzero status.
int run(int argc, char** argv, std::ostream& log, std::ostream& err);

}  // namespace vulntriage::cli

#endif  // VULNTRIAGE_CLI_HPP_
