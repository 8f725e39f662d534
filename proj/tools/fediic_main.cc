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

// fediic: command-line front end.
//
//   fediic datagen   --config <file> --out-dir <dir>
//   fediic partition --data <csv> --config <file> --out <json>
//   fediic train     --config <file> --out-dir <dir>
//   fediic evaluate  --checkpoint <file> --test <csv>
//   fediic report    --runs <dir...> [--out <dir>]
//   fediic keygen    --bits <n> --out <file> [--seed <s>]
//
// Exit codes: 0 success, 1 unexpected failure, 2 configuration or usage
// error, 3 data error, 4 numeric failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fediic/config.h"
#include "fediic/errors.h"
#include "fediic/metrics.h"
#include "fediic/paillier.h"
#include "fediic/partition.h"
#include "fediic/report.h"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kDataError = 3, kNumericError = 4 };

std::string FormatValue(double v) {
  if (std::isinf(v)) return "inf";
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

int ExitCodeFor(const std::exception& e) {
  if (dynamic_cast<const fediic::NumericError*>(&e)) return kNumericError;
  if (dynamic_cast<const fediic::DataError*>(&e)) return kDataError;
  if (dynamic_cast<const fediic::ConfigError*>(&e) ||
      dynamic_cast<const fediic::ContractError*>(&e) ||
      dynamic_cast<const fediic::StructuralError*>(&e)) {
    return kConfigError;
  }
  return kFailure;
}

int RunDatagen(const std::string& config_path, const std::string& out_dir) {
  const fediic::ExperimentConfig config = fediic::LoadConfig(config_path);
  if (!config.data.synthetic()) {
    throw fediic::ConfigError("datagen: [data] must describe synthetic data");
  }
  const fediic::PreparedData data = fediic::PrepareData(config.data);
  fs::create_directories(out_dir);
  fediic::WriteCsv(data.train, (fs::path(out_dir) / "train.csv").string());
  fediic::WriteCsv(data.validation, (fs::path(out_dir) / "val.csv").string());
  fediic::WriteCsv(data.test, (fs::path(out_dir) / "test.csv").string());
  const auto counts = data.train.ClassCounts();
  std::cout << "train class counts:";
  for (auto c : counts) std::cout << ' ' << c;
  std::cout << "\nwrote " << out_dir << "/{train,val,test}.csv\n";
  return kOk;
}

int RunPartition(const std::string& data_path, const std::string& config_path,
                 const std::string& out_path) {
  const fediic::ExperimentConfig config = fediic::LoadConfig(config_path);
  const fediic::LabeledDataset data = fediic::LoadCsv(data_path);
  const fediic::L2PartitionOutput out = fediic::L2Partition(data, config.partition);

  nlohmann::json doc = fediic::PartitionToJson(out.partition);
  doc["report"] = fediic::ReportToJson(out.report);
  std::ofstream file(out_path);
  if (!file) throw fediic::DataError("cannot write '" + out_path + "'");
  file << doc.dump() << '\n';

  const auto& r = out.report;
  std::cout << "global imbalance degree: " << FormatValue(r.global_gamma) << "\n";
  std::cout << "client  size  imbalance\n";
  const auto sizes = out.partition.ClientSizes();
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    std::printf("%6zu  %4zu  %s\n", k, sizes[k], FormatValue(r.per_client_gamma[k]).c_str());
  }
  std::cout << "class  concentration  concentrated\n";
  for (std::size_t c = 0; c < r.per_class_conc.size(); ++c) {
    std::printf("%5zu  %13s  %s\n", c, FormatValue(r.per_class_conc[c]).c_str(),
                r.per_class_concentrated[c] ? "yes" : "no");
  }
  std::cout << "wrote " << out_path << "\n";
  return kOk;
}

int RunTrain(const std::string& config_path, const std::string& out_dir) {
  const fediic::ExperimentConfig config = fediic::LoadConfig(config_path);
  fediic::TrainAll(config, out_dir,
                   [](const std::string& dir, const fediic::ExperimentResult& result) {
                     std::printf("%s: best_val_round=%d test_bacc=%.4f minority=%.4f "
                                 "majority=%.4f\n",
                                 dir.c_str(), result.best_val_round,
                                 result.final_test_bacc, result.final_minority_bacc,
                                 result.final_majority_bacc);
                     std::fflush(stdout);
                   });
  return kOk;
}

int RunEvaluate(const std::string& checkpoint_path, const std::string& test_path) {
  const fediic::Checkpoint ckpt = fediic::LoadCheckpoint(checkpoint_path);
  const int L = ckpt.params.spec().num_classes;
  const fediic::LabeledDataset test = fediic::LoadCsv(test_path, L);
  if (test.num_classes != L) {
    throw fediic::DataError("test set has labels beyond the model's " +
                            std::to_string(L) + " classes");
  }
  const fediic::ConfusionMatrix cm = fediic::EvaluateModel(ckpt.params, test);
  std::cout << "confusion matrix (rows: true class, columns: predicted)\n";
  for (int t = 0; t < L; ++t) {
    for (int p = 0; p < L; ++p) std::printf("%s%6lld", p ? " " : "", static_cast<long long>(cm(t, p)));
    std::printf("\n");
  }
  const auto recalls = cm.Recalls();
  for (int c = 0; c < L; ++c) std::printf("recall[%d] = %.4f\n", c, recalls[static_cast<std::size_t>(c)]);
  std::printf("bacc = %.6f\n", fediic::Bacc(cm));
  return kOk;
}

// A directory with run.json is a run; otherwise its run subdirectories are.
std::vector<std::string> ExpandRuns(const std::vector<std::string>& inputs) {
  std::vector<std::string> runs;
  for (const std::string& in : inputs) {
    if (fs::exists(fs::path(in) / "run.json")) {
      runs.push_back(in);
      continue;
    }
    if (!fs::is_directory(in)) throw fediic::DataError("report: no such directory '" + in + "'");
    std::vector<std::string> found;
    for (const auto& entry : fs::directory_iterator(in))
      if (fs::exists(entry.path() / "run.json")) found.push_back(entry.path().string());
    if (found.empty()) throw fediic::DataError("report: no runs under '" + in + "'");
    std::sort(found.begin(), found.end());
    runs.insert(runs.end(), found.begin(), found.end());
  }
  return runs;
}

int RunReport(const std::vector<std::string>& inputs, const std::string& out_dir) {
  std::vector<fediic::RunSummary> runs;
  for (const std::string& dir : ExpandRuns(inputs)) runs.push_back(fediic::LoadRun(dir));
  const fediic::Report report = fediic::BuildReport(std::move(runs));
  std::cout << report.summary_csv;
  if (!out_dir.empty()) {
    fediic::WriteReport(report, out_dir);
    std::cout << "wrote " << out_dir << "/{summary,series}.csv\n";
  }
  return kOk;
}

int RunKeygen(int bits, const std::string& out_path, std::uint64_t seed) {
  const auto keys = fediic::paillier::GenerateKeyPair(bits, seed);
  std::ofstream file(out_path);
  if (!file) throw fediic::DataError("cannot write '" + out_path + "'");
  file << fediic::paillier::KeyPairToJson(keys).dump(2) << '\n';
  std::cout << "wrote " << bits << "-bit key pair to " << out_path
            << " (desk scale, not for production)\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FedIIC federated-learning simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, data_path, out_path, checkpoint_path, test_path;
  std::vector<std::string> run_dirs;
  int bits = 512;
  std::uint64_t seed = 0;

  auto* datagen = app.add_subcommand("datagen", "Write the synthetic train/val/test CSVs");
  datagen->add_option("--config", config_path, "Experiment config")->required();
  datagen->add_option("--out-dir", out_dir, "Output directory")->required();

  auto* partition = app.add_subcommand("partition", "Build and audit a client split");
  partition->add_option("--data", data_path, "Training CSV")->required();
  partition->add_option("--config", config_path, "Experiment config")->required();
  partition->add_option("--out", out_path, "Partition JSON")->required();

  auto* train = app.add_subcommand("train", "Run every configured mode and seed");
  train->add_option("--config", config_path, "Experiment config")->required();
  train->add_option("--out-dir", out_dir, "Output directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Confusion matrix and BACC");
  evaluate->add_option("--checkpoint", checkpoint_path, "Model checkpoint")->required();
  evaluate->add_option("--test", test_path, "Test CSV")->required();

  auto* report = app.add_subcommand("report", "Summary and efficiency tables");
  report->add_option("--runs", run_dirs, "Run directories or their parent")->required();
  report->add_option("--out", out_dir, "Directory for summary.csv and series.csv");

  auto* keygen = app.add_subcommand("keygen", "Generate secure-aggregation keys");
  keygen->add_option("--bits", bits, "Modulus size in bits")->required();
  keygen->add_option("--out", out_path, "Key JSON")->required();
  auto* seed_opt = keygen->add_option("--seed", seed, "Deterministic seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*datagen) return RunDatagen(config_path, out_dir);
    if (*partition) return RunPartition(data_path, config_path, out_path);
    if (*train) return RunTrain(config_path, out_dir);
    if (*evaluate) return RunEvaluate(checkpoint_path, test_path);
    if (*report) return RunReport(run_dirs, out_dir);
    if (*keygen) {
      if (!*seed_opt) seed = std::random_device{}();
      return RunKeygen(bits, out_path, seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "fediic: " << e.what() << "\n";
    return ExitCodeFor(e);
  }
  return kFailure;
}
