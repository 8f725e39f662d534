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

#include "fediic/federation.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <thread>
#include <utility>

#include "fediic/errors.h"
#include "fediic/metrics.h"
#include "fediic/random.h"

namespace fediic {

namespace {

// Stream tags for DeriveSeed.
enum : std::uint64_t {
  kInitStream = 1,
  kKeyStream,
  kSampleStream,
  kStatsStream,
  kTrainStream,
  kScheduleStream,
  kAugmentStream,
};

struct ModeName {
  Mode mode;
  const char* name;
};

constexpr ModeName kModeNames[] = {
    {Mode::kFedAvg, "fedavg"},
    {Mode::kFedAvgLa, "fedavg+la"},
    {Mode::kFedAvgDala, "fedavg+dala"},
    {Mode::kFedAvgDalaIntra, "fedavg+dala+intra"},
    {Mode::kFedAvgDalaInter, "fedavg+dala+inter"},
    {Mode::kFedIIC, "fediic"},
};

std::size_t CiphertextBytes(const paillier::PublicKey& pk) {
  return (mpz_sizeinbase(pk.n_squared.get_mpz_t(), 2) + 7) / 8;
}

}  // namespace

Mode ParseMode(const std::string& name) {
  for (const auto& m : kModeNames)
    if (name == m.name) return m.mode;
  throw ConfigError("unknown federation mode '" + name + "'");
}

std::string ToString(Mode mode) {
  for (const auto& m : kModeNames)
    if (m.mode == mode) return m.name;
  return "unknown";
}

ModeTraits Traits(Mode mode) {
  switch (mode) {
    case Mode::kFedAvg:
      return {};
    case Mode::kFedAvgLa:
      return {.collect_stats = true};
    case Mode::kFedAvgDala:
      return {.collect_stats = true, .difficulty = true};
    case Mode::kFedAvgDalaIntra:
      return {.collect_stats = true, .difficulty = true, .intra = true};
    case Mode::kFedAvgDalaInter:
      return {.collect_stats = true, .difficulty = true, .inter = true};
    case Mode::kFedIIC:
      return {.collect_stats = true, .difficulty = true, .intra = true, .inter = true};
  }
  return {};
}

void FederationConfig::Validate() const {
  if (rounds < 1) throw ConfigError("federation: rounds must be >= 1");
  if (local_epochs < 1) throw ConfigError("federation: local_epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("federation: batch_size must be >= 1");
  if (!(client_fraction > 0.0 && client_fraction <= 1.0)) {
    throw ConfigError("federation: client_fraction must be in (0, 1]");
  }
  if (threads < 1) throw ConfigError("federation: threads must be >= 1");
  if (!(optimizer.learning_rate >= 0.0)) {
    throw ConfigError("federation: learning rate must be >= 0");
  }
  if (secure && key_bits < 256) throw ConfigError("secureagg: key_bits must be >= 256");
  loss.Validate();
}

// ---------------------------------------------------------------------------

const char* ToString(MessageKind kind) {
  switch (kind) {
    case MessageKind::kModelDown: return "model_down";
    case MessageKind::kModelUp: return "model_up";
    case MessageKind::kStatsUp: return "stats_up";
    case MessageKind::kStatsDown: return "stats_down";
    case MessageKind::kPrototypesDown: return "prototypes_down";
  }
  return "unknown";
}

bool IsUpstream(MessageKind kind) {
  return kind == MessageKind::kModelUp || kind == MessageKind::kStatsUp;
}

void Channel::Send(MessageKind kind, int client, std::size_t bytes) {
  log_.push_back({kind, client, bytes});
}

std::size_t Channel::Count(MessageKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      log_.begin(), log_.end(), [kind](const Message& m) { return m.kind == kind; }));
}

std::size_t Channel::BytesUp() const {
  std::size_t total = 0;
  for (const Message& m : log_)
    if (IsUpstream(m.kind)) total += m.bytes;
  return total;
}

std::size_t Channel::BytesDown() const {
  std::size_t total = 0;
  for (const Message& m : log_)
    if (!IsUpstream(m.kind)) total += m.bytes;
  return total;
}

// ---------------------------------------------------------------------------

ClassStats LocalClassStats(const ModelParams& params, const LabeledDataset& data) {
  ClassStats stats = ClassStats::Zeros(params.spec().num_classes);
  if (data.empty()) return stats;
  const Tensor logp = kernels::LogSoftmaxRows(ForwardLogits(params, data.AllFeatures()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto y = static_cast<std::size_t>(data.labels[i]);
    ++stats.counts[y];
    stats.loss_totals[y] -= logp(i, y);
  }
  return stats;
}

ClassStats CollectClassStats(const ModelParams& global,
                             std::span<const LabeledDataset> clients,
                             std::span<const int> participants,
                             const SecureContext* secure, std::uint64_t seed,
                             Channel* channel) {
  if (participants.empty()) throw ConfigError("class stats: no participants");
  const auto L = static_cast<std::size_t>(global.spec().num_classes);
  const std::size_t plain_bytes = 2 * L * sizeof(double);
  std::vector<ClassStats> parts;
  for (int k : participants)
    parts.push_back(LocalClassStats(global, clients[static_cast<std::size_t>(k)]));

  ClassStats total;
  if (secure) {
    const auto& pk = secure->keys.public_key;
    AggregationServer server(pk);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      paillier::Randomness rng(
          DeriveSeed(seed, {static_cast<std::uint64_t>(participants[i])}));
      server.Accept(EncryptStats(pk, parts[i], secure->codec, rng));
      if (channel) channel->Send(MessageKind::kStatsUp, participants[i], 2 * L * CiphertextBytes(pk));
    }
    // The aggregate travels to the key holder (client 0), which publishes
    // the decrypted totals.
    if (channel) {
      channel->Send(MessageKind::kStatsDown, 0, 2 * L * CiphertextBytes(pk));
      channel->Send(MessageKind::kStatsUp, 0, plain_bytes);
    }
    total = KeyHolder(secure->keys, secure->codec).Decrypt(server.aggregate());
  } else {
    for (int k : participants)
      if (channel) channel->Send(MessageKind::kStatsUp, k, plain_bytes);
    total = PlainSum(parts);
  }
  if (channel)
    for (int k : participants) channel->Send(MessageKind::kStatsDown, k, plain_bytes);
  return total;
}

std::vector<std::vector<std::size_t>> BatchSchedule(std::size_t num_samples,
                                                    std::size_t batch_size,
                                                    std::uint64_t seed) {
  if (batch_size == 0) throw ContractError("batch schedule: batch_size must be > 0");
  std::vector<std::size_t> order(num_samples);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < num_samples; start += batch_size) {
    const std::size_t end = std::min(num_samples, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

namespace {

Tensor StackRows(const Tensor& a, const Tensor& b) {
  std::vector<double> v(a.data());
  v.insert(v.end(), b.data().begin(), b.data().end());
  return Tensor::Matrix(a.rows() + b.rows(), a.cols(), std::move(v));
}

// Picks the first `rows` rows of a (2 * rows)-row matrix.
Tensor FirstHalfSelector(std::size_t rows) {
  Tensor sel({rows, 2 * rows}, 0.0);
  for (std::size_t i = 0; i < rows; ++i) sel(i, i) = 1.0;
  return sel;
}

}  // namespace

LocalResult LocalTrain(const LabeledDataset& data, const ModelParams& global,
                       const LocalTrainInputs& inputs, const FederationConfig& config,
                       std::uint64_t seed) {
  if (data.empty()) throw ContractError("local train: client has no data");
  const ModeTraits traits = Traits(config.mode);
  if (config.mode != Mode::kFedAvg && inputs.margins == nullptr) {
    throw ContractError("local train: mode " + ToString(config.mode) +
                        " needs a margin table");
  }
  if (traits.inter && inputs.prototypes == nullptr) {
    throw ContractError("local train: inter-client loss needs prototypes");
  }
  const bool contrast = traits.intra || traits.inter;

  LocalResult result{global};
  OptimizerState optimizer(config.optimizer);
  for (int epoch = 0; epoch < config.local_epochs; ++epoch) {
    const auto schedule = BatchSchedule(
        data.size(), config.batch_size,
        DeriveSeed(seed, {kScheduleStream, static_cast<std::uint64_t>(epoch)}));
    for (std::size_t b = 0; b < schedule.size(); ++b) {
      const auto& idx = schedule[b];
      const std::vector<int> labels = data.BatchLabels(idx);
      const TwoViewBatch views = AugmentTwoViews(
          data.Batch(idx), labels, config.augment,
          DeriveSeed(seed, {kAugmentStream, static_cast<std::uint64_t>(epoch), b}));

      ad::Tape tape;
      const BoundModel m = Bind(tape, result.params, true);
      ad::Var logits1, z;
      std::vector<int> labels2;
      if (contrast) {
        const ad::Var features =
            ExtractFeatures(m, tape.Constant(StackRows(views.view1, views.view2)));
        logits1 = ad::MatMul(tape.Constant(FirstHalfSelector(idx.size())),
                             ClassifierLogits(m, features));
        z = Embed(m, features);
        labels2 = labels;
        labels2.insert(labels2.end(), labels.begin(), labels.end());
      } else {
        logits1 = ClassifierLogits(m, ExtractFeatures(m, tape.Constant(views.view1)));
      }
      const ad::Var dala = config.mode == Mode::kFedAvg
                               ? CeLoss(logits1, labels)
                               : DalaLoss(logits1, labels, *inputs.margins);
      std::optional<ad::Var> intra, inter;
      if (traits.intra) {
        intra = IntraLoss(z, labels2, inputs.local_prior, config.loss.tau, config.loss.t);
      }
      if (traits.inter) {
        inter = InterLoss(z, labels2, inputs.prototypes->vectors, config.loss.tau);
      }
      const ad::Var total = TotalLoss(dala, intra ? &*intra : nullptr,
                                      inter ? &*inter : nullptr, config.loss);
      if (!total.value().all_finite()) {
        throw NumericError("local train: non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch " + std::to_string(b));
      }
      tape.Backward(total);
      std::vector<Tensor> grads;
      grads.reserve(m.vars.size());
      for (const ad::Var& v : m.vars) grads.push_back(v.grad());
      optimizer.Step(result.params.tensors(), grads);

      result.loss_dala += dala.value()[0];
      if (intra) result.loss_intra += intra->value()[0];
      if (inter) result.loss_inter += inter->value()[0];
      ++result.batches;
    }
  }
  const double n = static_cast<double>(result.batches);
  result.loss_dala /= n;
  result.loss_intra /= n;
  result.loss_inter /= n;
  if (!result.params.AllFinite()) throw NumericError("local train: non-finite parameters");
  return result;
}

ModelParams FedAvgAggregate(std::span<const ModelParams> models,
                            std::span<const double> weights) {
  if (models.empty()) throw ContractError("fedavg: no models");
  if (models.size() != weights.size()) {
    throw StructuralError("fedavg: " + std::to_string(models.size()) + " models but " +
                          std::to_string(weights.size()) + " weights");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ContractError("fedavg: weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw ContractError("fedavg: weights sum to zero");
  const ModelParams& first = models.front();
  for (const ModelParams& m : models) {
    if (!(m.spec() == first.spec())) {
      throw StructuralError("fedavg: models have different architectures");
    }
  }
  ModelParams out = ModelParams::Zeros(first.spec());
  for (std::size_t k = 0; k < models.size(); ++k) {
    const double w = weights[k] / total;
    for (std::size_t t = 0; t < out.tensors().size(); ++t) {
      auto dst = out.tensors()[t].values();
      auto src = models[k].tensors()[t].values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += w * src[i];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Simulation::Simulation(FederationConfig config, ModelSpec spec, FederationData data)
    : config_(std::move(config)), data_(std::move(data)) {
  config_.Validate();
  spec.Validate();
  if (data_.clients.empty()) throw ConfigError("federation: no clients");
  for (const LabeledDataset* ds : {&data_.validation, &data_.test}) {
    if (ds->dim != spec.input_dim || ds->num_classes != spec.num_classes) {
      throw DataError("federation: evaluation data does not match the model");
    }
  }
  for (const LabeledDataset& c : data_.clients) {
    if (!c.empty() && (c.dim != spec.input_dim || c.num_classes != spec.num_classes)) {
      throw DataError("federation: client data does not match the model");
    }
    local_priors_.push_back(SmoothedPrior(c.empty()
                                              ? std::vector<std::int64_t>(
                                                    static_cast<std::size_t>(spec.num_classes), 0)
                                              : c.ClassCounts()));
  }
  global_ = ModelParams::Init(spec, DeriveSeed(config_.seed, {kInitStream}));
  if (config_.secure && Traits(config_.mode).collect_stats) {
    secure_ = SecureContext{
        paillier::GenerateKeyPair(config_.key_bits, DeriveSeed(config_.seed, {kKeyStream})),
        FixedPointCodec(config_.scale_bits)};
  }
}

std::vector<int> Simulation::SampleParticipants(int round) const {
  const int K = static_cast<int>(data_.clients.size());
  const int m = std::clamp(
      static_cast<int>(std::lround(config_.client_fraction * K)), 1, K);
  std::vector<int> ids(static_cast<std::size_t>(K));
  std::iota(ids.begin(), ids.end(), 0);
  if (m == K) return ids;
  Rng rng(DeriveSeed(config_.seed, {kSampleStream, static_cast<std::uint64_t>(round)}));
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(static_cast<std::size_t>(m));
  std::sort(ids.begin(), ids.end());
  return ids;
}

RoundRecord Simulation::RunRound() {
  const int r = ++round_;
  const std::size_t log_start = channel_.log().size();
  const ModeTraits traits = Traits(config_.mode);

  RoundRecord record;
  record.round = r;
  record.participants = SampleParticipants(r);
  const std::size_t model_bytes = global_.NumValues() * sizeof(double);
  for (int k : record.participants) channel_.Send(MessageKind::kModelDown, k, model_bytes);

  std::vector<int> active;
  for (int k : record.participants) {
    (data_.clients[static_cast<std::size_t>(k)].empty() ? record.skipped : active).push_back(k);
  }

  const double q = traits.difficulty ? config_.loss.q : 0.0;
  if (traits.collect_stats && !active.empty()) {
    record.stats = CollectClassStats(
        global_, data_.clients, record.participants, secure_ ? &*secure_ : nullptr,
        DeriveSeed(config_.seed, {kStatsStream, static_cast<std::uint64_t>(r)}), &channel_);
    record.margins = DalaMarginsFromTotals(record.stats->counts,
                                           record.stats->loss_totals, q);
  }
  std::optional<PrototypeSet> prototypes;
  if (traits.inter && !active.empty()) {
    prototypes = DerivePrototypes(global_, config_.prototypes);
    const std::size_t bytes = prototypes->vectors.size() * sizeof(double);
    for (int k : record.participants) channel_.Send(MessageKind::kPrototypesDown, k, bytes);
  }

  std::vector<std::optional<LocalResult>> results(active.size());
  std::vector<std::exception_ptr> errors(active.size());
  auto train_one = [&](std::size_t slot) {
    const int k = active[slot];
    const auto& client = data_.clients[static_cast<std::size_t>(k)];
    LocalTrainInputs inputs;
    std::optional<MarginTable> local_margins;
    if (record.margins) {
      inputs.margins = &*record.margins;
      if (config_.local_prior_margins) {
        local_margins = MarginsFromPriors(local_priors_[static_cast<std::size_t>(k)],
                                          record.margins->mean_losses, q);
        inputs.margins = &*local_margins;
      }
    }
    if (prototypes) inputs.prototypes = &*prototypes;
    inputs.local_prior = local_priors_[static_cast<std::size_t>(k)];
    try {
      results[slot] = LocalTrain(
          client, global_, inputs, config_,
          DeriveSeed(config_.seed, {kTrainStream, static_cast<std::uint64_t>(k),
                                    static_cast<std::uint64_t>(r)}));
    } catch (...) {
      errors[slot] = std::current_exception();
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(config_.threads), active.size());
  if (workers <= 1) {
    for (std::size_t s = 0; s < active.size(); ++s) train_one(s);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t s = next++; s < active.size(); s = next++) train_one(s);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  if (!active.empty()) {
    std::vector<ModelParams> models;
    std::vector<double> weights;
    for (std::size_t s = 0; s < active.size(); ++s) {
      channel_.Send(MessageKind::kModelUp, active[s], model_bytes);
      models.push_back(std::move(results[s]->params));
      weights.push_back(static_cast<double>(
          data_.clients[static_cast<std::size_t>(active[s])].size()));
      record.loss_dala += results[s]->loss_dala;
      record.loss_intra += results[s]->loss_intra;
      record.loss_inter += results[s]->loss_inter;
    }
    const double n = static_cast<double>(active.size());
    record.loss_dala /= n;
    record.loss_intra /= n;
    record.loss_inter /= n;
    global_ = FedAvgAggregate(models, weights);
  }

  record.bacc_val = Bacc(EvaluateModel(global_, data_.validation));
  const ConfusionMatrix test_cm = EvaluateModel(global_, data_.test);
  if (data_.minority_classes.empty()) {
    record.bacc_test = Bacc(test_cm);
    record.minority_bacc = record.majority_bacc = record.bacc_test;
  } else {
    const GroupBacc g = ComputeGroupBacc(test_cm, data_.minority_classes);
    record.bacc_test = g.overall;
    record.minority_bacc = g.minority;
    record.majority_bacc = g.majority;
  }
  for (std::size_t i = log_start; i < channel_.log().size(); ++i) {
    const Message& m = channel_.log()[i];
    (IsUpstream(m.kind) ? record.bytes_up : record.bytes_down) += m.bytes;
  }
  return record;
}

ExperimentResult RunExperiment(const FederationConfig& config, const ModelSpec& spec,
                               FederationData data) {
  Simulation sim(config, spec, std::move(data));
  ExperimentResult result;
  for (int r = 0; r < config.rounds; ++r) {
    RoundRecord rec = sim.RunRound();
    if (result.records.empty() || rec.bacc_val > result.best_val_bacc) {
      result.best_val_round = rec.round;
      result.best_val_bacc = rec.bacc_val;
      result.final_test_bacc = rec.bacc_test;
      result.final_minority_bacc = rec.minority_bacc;
      result.final_majority_bacc = rec.majority_bacc;
      result.best_params = sim.global();
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

std::string FormatRoundsCsv(std::span<const RoundRecord> records, Mode mode) {
  std::string out =
      "round,mode,bacc_val,bacc_test,minority_bacc,majority_bacc,loss_dala,"
      "loss_intra,loss_inter,bytes_up,bytes_down\n";
  const std::string name = ToString(mode);
  char buf[512];
  for (const RoundRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%zu,%zu\n",
                  r.round, name.c_str(), r.bacc_val, r.bacc_test, r.minority_bacc,
                  r.majority_bacc, r.loss_dala, r.loss_intra, r.loss_inter, r.bytes_up,
                  r.bytes_down);
    out += buf;
  }
  return out;
}

}  // namespace fediic
