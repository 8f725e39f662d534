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

// Round orchestration: client sampling, model broadcast, per-class statistics
// (optionally encrypted), margins and prototypes, local training, FedAvg, and
// evaluation. All traffic passes through an audited in-process Channel.

#ifndef FEDIIC_FEDERATION_H_
#define FEDIIC_FEDERATION_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fediic/dataset.h"
#include "fediic/losses.h"
#include "fediic/model.h"
#include "fediic/optimizer.h"
#include "fediic/secure_aggregation.h"

namespace fediic {

enum class Mode {
  kFedAvg,
  kFedAvgLa,
  kFedAvgDala,
  kFedAvgDalaIntra,
  kFedAvgDalaInter,
  kFedIIC,
};

// "fedavg", "fedavg+la", "fedavg+dala", "fedavg+dala+intra",
// "fedavg+dala+inter", "fediic".
Mode ParseMode(const std::string& name);
std::string ToString(Mode mode);

struct ModeTraits {
  bool collect_stats = false;
  bool difficulty = false;  // q from the loss config; otherwise q = 0
  bool intra = false;
  bool inter = false;
};
ModeTraits Traits(Mode mode);

struct FederationConfig {
  Mode mode = Mode::kFedIIC;
  int rounds = 60;
  int local_epochs = 1;
  std::size_t batch_size = 32;
  double client_fraction = 1.0;
  LossConfig loss;
  OptimizerConfig optimizer;
  AugmentOptions augment;
  PrototypeOptions prototypes;
  bool secure = false;
  int key_bits = 512;
  int scale_bits = 16;
  // Margins from each client's own class prior instead of the aggregated one.
  bool local_prior_margins = false;
  int threads = 1;
  std::uint64_t seed = 0;

  void Validate() const;
};

// ---------------------------------------------------------------------------
// Simulated channel.

enum class MessageKind { kModelDown, kModelUp, kStatsUp, kStatsDown, kPrototypesDown };
const char* ToString(MessageKind kind);
bool IsUpstream(MessageKind kind);

struct Message {
  MessageKind kind;
  int client;
  std::size_t bytes;
};

class Channel {
 public:
  void Send(MessageKind kind, int client, std::size_t bytes);
  const std::vector<Message>& log() const { return log_; }
  std::size_t Count(MessageKind kind) const;
  std::size_t BytesUp() const;
  std::size_t BytesDown() const;
  void Clear() { log_.clear(); }

 private:
  std::vector<Message> log_;
};

// ---------------------------------------------------------------------------
// Round phases.

// Per-class CE totals of `params` over every sample of `data`.
ClassStats LocalClassStats(const ModelParams& params, const LabeledDataset& data);

// Holds the key pair of the designated key-holding client and the codec.
struct SecureContext {
  paillier::KeyPair keys;
  FixedPointCodec codec;
};

// Sums LocalClassStats over `participants`; encrypted when `secure` is given.
ClassStats CollectClassStats(const ModelParams& global,
                             std::span<const LabeledDataset> clients,
                             std::span<const int> participants,
                             const SecureContext* secure, std::uint64_t seed,
                             Channel* channel = nullptr);

// Sample order of one local epoch, split into consecutive batches.
std::vector<std::vector<std::size_t>> BatchSchedule(std::size_t num_samples,
                                                    std::size_t batch_size,
                                                    std::uint64_t seed);

struct LocalTrainInputs {
  const MarginTable* margins = nullptr;      // required unless mode is fedavg
  const PrototypeSet* prototypes = nullptr;  // required for inter modes
  std::vector<double> local_prior;           // smoothed, required for intra
};

struct LocalResult {
  ModelParams params;
  double loss_dala = 0.0;   // batch means over the client's updates
  double loss_intra = 0.0;
  double loss_inter = 0.0;
  std::size_t batches = 0;
};

// Throws NumericError when a loss becomes non-finite.
LocalResult LocalTrain(const LabeledDataset& data, const ModelParams& global,
                       const LocalTrainInputs& inputs, const FederationConfig& config,
                       std::uint64_t seed);

// Weighted average of every tensor; throws StructuralError on mismatched
// architectures and ContractError when the weights do not sum to > 0.
ModelParams FedAvgAggregate(std::span<const ModelParams> models,
                            std::span<const double> weights);

// ---------------------------------------------------------------------------

struct RoundRecord {
  int round = 0;
  std::vector<int> participants;
  std::vector<int> skipped;  // participants without local data
  std::optional<ClassStats> stats;
  std::optional<MarginTable> margins;
  double loss_dala = 0.0;
  double loss_intra = 0.0;
  double loss_inter = 0.0;
  double bacc_val = 0.0;
  double bacc_test = 0.0;
  double minority_bacc = 0.0;
  double majority_bacc = 0.0;
  std::size_t bytes_up = 0;
  std::size_t bytes_down = 0;
};

struct FederationData {
  std::vector<LabeledDataset> clients;
  LabeledDataset validation;
  LabeledDataset test;
  std::vector<int> minority_classes;
};

class Simulation {
 public:
  Simulation(FederationConfig config, ModelSpec spec, FederationData data);

  RoundRecord RunRound();

  const ModelParams& global() const { return global_; }
  const Channel& channel() const { return channel_; }
  const FederationConfig& config() const { return config_; }
  int rounds_completed() const { return round_; }
  std::vector<int> SampleParticipants(int round) const;

 private:
  FederationConfig config_;
  FederationData data_;
  ModelParams global_;
  std::optional<SecureContext> secure_;
  std::vector<std::vector<double>> local_priors_;
  Channel channel_;
  int round_ = 0;
};

struct ExperimentResult {
  std::vector<RoundRecord> records;
  int best_val_round = 0;  // 1-based
  double best_val_bacc = 0.0;
  double final_test_bacc = 0.0;  // test BACC of the best-validation model
  double final_minority_bacc = 0.0;
  double final_majority_bacc = 0.0;
  ModelParams best_params;
};

ExperimentResult RunExperiment(const FederationConfig& config, const ModelSpec& spec,
                               FederationData data);

// Header plus one line per record with fixed formatting.
std::string FormatRoundsCsv(std::span<const RoundRecord> records, Mode mode);

}  // namespace fediic

#endif  // FEDIIC_FEDERATION_H_
