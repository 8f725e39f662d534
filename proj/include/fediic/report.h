/*
 * Copyright 2026 The FedIIC Simulator Authors.
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

// Run directories and the cross-run report.
//
// A run directory `<out>/<mode>_seed<k>/` holds rounds.csv (one line per
// round), run.json (best-validation summary) and model.ckpt (the
// best-validation model). The report reads any set of run directories and
// writes summary.csv and series.csv.

#ifndef FEDIIC_REPORT_H_
#define FEDIIC_REPORT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fediic/config.h"
#include "fediic/federation.h"

namespace fediic {

struct RunSummary {
  std::string mode;
  std::uint64_t seed = 0;
  double final_bacc = 0.0;
  int best_val_round = 0;
  double minority_bacc = 0.0;
  double majority_bacc = 0.0;
  std::vector<double> val_series;
  std::vector<double> test_series;
};

std::string RunDirectoryName(Mode mode, std::uint64_t seed);

// Writes rounds.csv, run.json and model.ckpt into `dir` (created if needed).
void WriteRun(const std::string& dir, Mode mode, std::uint64_t seed,
              const ExperimentResult& result);

// Throws DataError when rounds.csv or run.json is missing or malformed.
RunSummary LoadRun(const std::string& dir);

// Called after each finished run with its directory.
using RunCallback = std::function<void(const std::string& dir, const ExperimentResult&)>;

// Every (mode, seed) pair of `config`, written under `out_dir`. Returns the
// run directories in execution order.
std::vector<std::string> TrainAll(const ExperimentConfig& config, const std::string& out_dir,
                                  const RunCallback& on_run = {});

struct EfficiencyEntry {
  std::optional<int> rounds;      // nullopt: never matched the baseline
  std::optional<double> speedup;
};

// Baseline is the fedavg run with the same seed; its target is the best value
// of its validation series and its round count the first round reaching it.
std::optional<EfficiencyEntry> EfficiencyAgainst(const RunSummary& method,
                                                 const RunSummary& baseline);

struct Report {
  std::string summary_csv;
  std::string series_csv;
};

// Rows are ordered by mode then seed; each mode gets "mean" and "std" rows.
Report BuildReport(std::vector<RunSummary> runs);
void WriteReport(const Report& report, const std::string& out_dir);

}  // namespace fediic

#endif  // FEDIIC_REPORT_H_
