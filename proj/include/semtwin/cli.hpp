// Copyright 2026 The semtwin Authors
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

// Scenario runner behind the semtwin executable.

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "semtwin/layout.hpp"
#include "semtwin/storm.hpp"

namespace semtwin::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,      // bad flags, bad config, missing inputs
  kDomain = 2,     // schema violation, parse failure, infeasible layout
  kConflicts = 3,  // reason found at least one conflict
};

struct Paths {
  std::string ontology, extraction, documents, replay, gazetteer, boundary,
      hurdat2, layout, graph, rules, reference_layout, annotations, extracted,
      ground_truth;
};

struct ScenarioConfig {
  Paths paths;
  std::string out_dir = "out";
  bool verbose = false;

  storm::SimConfig sim;
  std::string storm_id = "AL182012";
  std::string start, end;  // ISO times; empty means the track span

  layout::OptConfig opt;  // boundary is filled from paths.boundary
  int rows = 13;
  int turbines = 121;
  double inset_m = 600.0;

  double match_threshold = 0.5;
  std::string document_label = "document";
  std::string model_label = "replay";
};

// Parses argv (subcommand plus flags and an optional --config file) and runs
// the command. Messages go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace semtwin::cli
