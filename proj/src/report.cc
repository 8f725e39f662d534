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

#include "fediic/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fediic/errors.h"
#include "fediic/metrics.h"
#include "fediic/random.h"
#include "json.hpp"

namespace fediic {

namespace fs = std::filesystem;

namespace {

constexpr const char* kRoundsHeader =
    "round,mode,bacc_val,bacc_test,minority_bacc,majority_bacc,loss_dala,"
    "loss_intra,loss_inter,bytes_up,bytes_down";

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

std::string Fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double ParseDouble(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(where + ": '" + s + "' is not a number");
  }
}

int ModeRank(const std::string& name) {
  try {
    return static_cast<int>(ParseMode(name));
  } catch (const ConfigError&) {
    return 1000;
  }
}

struct Stats {
  double mean = 0.0;
  double std = 0.0;
};

// Sample standard deviation; 0 for a single value.
Stats MeanStd(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

}  // namespace

std::string RunDirectoryName(Mode mode, std::uint64_t seed) {
  return ToString(mode) + "_seed" + std::to_string(seed);
}

void WriteRun(const std::string& dir, Mode mode, std::uint64_t seed,
              const ExperimentResult& result) {
  fs::create_directories(dir);
  WriteText(fs::path(dir) / "rounds.csv", FormatRoundsCsv(result.records, mode));
  nlohmann::json run = {
      {"mode", ToString(mode)},
      {"seed", seed},
      {"rounds", result.records.size()},
      {"best_val_round", result.best_val_round},
      {"best_val_bacc", result.best_val_bacc},
      {"final_test_bacc", result.final_test_bacc},
      {"final_minority_bacc", result.final_minority_bacc},
      {"final_majority_bacc", result.final_majority_bacc},
  };
  WriteText(fs::path(dir) / "run.json", run.dump(2) + "\n");
  SaveCheckpoint(result.best_params, (fs::path(dir) / "model.ckpt").string(),
                 {{"mode", ToString(mode)}, {"seed", seed},
                  {"best_val_round", result.best_val_round}});
}

RunSummary LoadRun(const std::string& dir) {
  const fs::path run_path = fs::path(dir) / "run.json";
  const fs::path rounds_path = fs::path(dir) / "rounds.csv";
  std::ifstream run_in(run_path);
  if (!run_in) throw DataError("report: missing " + run_path.string());
  RunSummary s;
  try {
    const nlohmann::json run = nlohmann::json::parse(run_in);
    s.mode = run.at("mode").get<std::string>();
    s.seed = run.at("seed").get<std::uint64_t>();
    s.best_val_round = run.at("best_val_round").get<int>();
    s.final_bacc = run.at("final_test_bacc").get<double>();
    s.minority_bacc = run.at("final_minority_bacc").get<double>();
    s.majority_bacc = run.at("final_majority_bacc").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("report: malformed " + run_path.string() + ": " + e.what());
  }
  std::ifstream in(rounds_path);
  if (!in) throw DataError("report: missing " + rounds_path.string());
  std::string line;
  if (!std::getline(in, line) || line != kRoundsHeader) {
    throw ParseError(1, "report: " + rounds_path.string() + " has an unexpected header");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 11) {
      throw ParseError(lineno, "report: expected 11 columns in " + rounds_path.string());
    }
    const std::string where = rounds_path.string() + ":" + std::to_string(lineno);
    s.val_series.push_back(ParseDouble(cols[2], where));
    s.test_series.push_back(ParseDouble(cols[3], where));
  }
  if (s.val_series.empty()) throw DataError("report: " + rounds_path.string() + " has no rounds");
  return s;
}

std::vector<std::string> TrainAll(const ExperimentConfig& config, const std::string& out_dir,
                                  const RunCallback& on_run) {
  fs::create_directories(out_dir);
  const PreparedData data = PrepareData(config.data);
  ModelSpec spec = config.model;
  spec.input_dim = data.train.dim;
  spec.num_classes = data.train.num_classes;
  std::vector<std::string> dirs;
  for (std::uint64_t seed : config.seeds) {
    PartitionConfig partition = config.partition;
    partition.seed = DeriveSeed(config.partition.seed, {seed});
    L2PartitionOutput split;
    const FederationData fed_data = BuildFederationData(data, partition, &split);
    nlohmann::json doc = PartitionToJson(split.partition);
    doc["report"] = ReportToJson(split.report);
    WriteText(fs::path(out_dir) / ("partition_seed" + std::to_string(seed) + ".json"),
              doc.dump() + "\n");
    for (Mode mode : config.modes) {
      FederationConfig fc = config.federation;
      fc.mode = mode;
      fc.seed = seed;
      const ExperimentResult result = RunExperiment(fc, spec, fed_data);
      const std::string dir = (fs::path(out_dir) / RunDirectoryName(mode, seed)).string();
      WriteRun(dir, mode, seed, result);
      if (on_run) on_run(dir, result);
      dirs.push_back(dir);
    }
  }
  return dirs;
}

std::optional<EfficiencyEntry> EfficiencyAgainst(const RunSummary& method,
                                                 const RunSummary& baseline) {
  if (baseline.val_series.empty()) return std::nullopt;
  const double target =
      *std::max_element(baseline.val_series.begin(), baseline.val_series.end());
  const int baseline_rounds = *RoundsToMatchBaseline(baseline.val_series, target);
  EfficiencyEntry e;
  e.rounds = RoundsToMatchBaseline(method.val_series, target);
  e.speedup = Speedup(baseline_rounds, e.rounds);
  return e;
}

Report BuildReport(std::vector<RunSummary> runs) {
  if (runs.empty()) throw DataError("report: no runs");
  std::stable_sort(runs.begin(), runs.end(), [](const RunSummary& a, const RunSummary& b) {
    const int ra = ModeRank(a.mode), rb = ModeRank(b.mode);
    if (ra != rb) return ra < rb;
    if (a.mode != b.mode) return a.mode < b.mode;
    return a.seed < b.seed;
  });
  std::map<std::uint64_t, const RunSummary*> baselines;
  for (const RunSummary& r : runs)
    if (r.mode == "fedavg") baselines.emplace(r.seed, &r);

  Report report;
  std::string& sum = report.summary_csv;
  sum = "mode,seed,final_bacc,best_val_round,minority_bacc,majority_bacc,"
        "efficiency_rounds,speedup\n";
  std::size_t i = 0;
  while (i < runs.size()) {
    std::size_t j = i;
    std::vector<double> bacc, best, minor, major, eff_rounds, speedups;
    bool any_baseline = false;
    for (; j < runs.size() && runs[j].mode == runs[i].mode; ++j) {
      const RunSummary& r = runs[j];
      std::string eff_col, speed_col;
      auto it = baselines.find(r.seed);
      if (it != baselines.end()) {
        any_baseline = true;
        const auto e = EfficiencyAgainst(r, *it->second);
        eff_col = e && e->rounds ? std::to_string(*e->rounds) : "/";
        speed_col = e && e->speedup ? Fixed(*e->speedup) : "/";
        if (e && e->rounds) {
          eff_rounds.push_back(*e->rounds);
          speedups.push_back(*e->speedup);
        }
      }
      sum += r.mode + "," + std::to_string(r.seed) + "," + Fixed(r.final_bacc) + "," +
             std::to_string(r.best_val_round) + "," + Fixed(r.minority_bacc) + "," +
             Fixed(r.majority_bacc) + "," + eff_col + "," + speed_col + "\n";
      bacc.push_back(r.final_bacc);
      best.push_back(r.best_val_round);
      minor.push_back(r.minority_bacc);
      major.push_back(r.majority_bacc);
    }
    const Stats sb = MeanStd(bacc), sr = MeanStd(best), smi = MeanStd(minor),
                sma = MeanStd(major), se = MeanStd(eff_rounds), ss = MeanStd(speedups);
    auto eff = [&](double v) {
      if (!any_baseline) return std::string();
      return eff_rounds.empty() ? std::string("/") : Fixed(v);
    };
    sum += runs[i].mode + ",mean," + Fixed(sb.mean) + "," + Fixed(sr.mean) + "," +
           Fixed(smi.mean) + "," + Fixed(sma.mean) + "," + eff(se.mean) + "," +
           eff(ss.mean) + "\n";
    sum += runs[i].mode + ",std," + Fixed(sb.std) + "," + Fixed(sr.std) + "," +
           Fixed(smi.std) + "," + Fixed(sma.std) + "," + eff(se.std) + "," +
           eff(ss.std) + "\n";
    i = j;
  }

  std::string& series = report.series_csv;
  series = "mode,seed,round,bacc_val,bacc_test\n";
  for (const RunSummary& r : runs) {
    for (std::size_t k = 0; k < r.val_series.size(); ++k) {
      series += r.mode + "," + std::to_string(r.seed) + "," + std::to_string(k + 1) + "," +
                Fixed(r.val_series[k]) + "," + Fixed(r.test_series[k]) + "\n";
    }
  }
  return report;
}

void WriteReport(const Report& report, const std::string& out_dir) {
  fs::create_directories(out_dir);
  WriteText(fs::path(out_dir) / "summary.csv", report.summary_csv);
  WriteText(fs::path(out_dir) / "series.csv", report.series_csv);
}

}  // namespace fediic
