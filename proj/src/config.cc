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

#include "fediic/config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fediic/errors.h"
#include "fediic/random.h"

namespace fediic {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& KnownKeys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"data",
       {"classes", "dim", "num_max", "gamma", "major_count", "spread", "val_per_class",
        "test_per_class", "seed", "train_csv", "val_csv", "test_csv",
        "minority_classes"}},
      {"partition",
       {"clients", "alpha_minor", "alpha_major", "agglomerate", "minor_classes", "seed"}},
      {"model", {"hidden", "feat_dim", "proj_hidden", "proj_dim"}},
      {"loss", {"tau", "t", "q", "k1", "k2", "local_prior"}},
      {"federation",
       {"modes", "seeds", "rounds", "local_epochs", "batch_size", "client_fraction",
        "optimizer", "lr", "momentum", "weight_decay", "threads", "noise_sigma",
        "dropout_p"}},
      {"secureagg", {"enabled", "key_bits", "scale_bits"}},
  };
  return keys;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <typename T>
  void Get(const std::string& key, T& out) const {
    auto node = tree_.get_child_optional(pt::ptree::path_type(key, '.'));
    if (!node) return;
    try {
      out = node->get_value<T>();
    } catch (const pt::ptree_bad_data&) {
      throw ConfigError("config: " + key + " has invalid value '" + node->data() + "'");
    }
  }

  void GetBool(const std::string& key, bool& out) const {
    std::string v;
    Get(key, v);
    if (v.empty()) return;
    if (v == "true" || v == "1" || v == "yes") {
      out = true;
    } else if (v == "false" || v == "0" || v == "no") {
      out = false;
    } else {
      throw ConfigError("config: " + key + " must be true or false, got '" + v + "'");
    }
  }

  std::vector<std::string> GetList(const std::string& key) const {
    std::string v;
    Get(key, v);
    std::vector<std::string> items;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b != std::string::npos) items.push_back(item.substr(b, e - b + 1));
    }
    return items;
  }

  template <typename T>
  bool GetNumbers(const std::string& key, std::vector<T>& out) const {
    if (!tree_.get_child_optional(pt::ptree::path_type(key, '.'))) return false;
    out.clear();
    for (const std::string& item : GetList(key)) {
      try {
        std::size_t pos = 0;
        const long long v = std::stoll(item, &pos);
        if (pos != item.size()) throw std::invalid_argument(item);
        out.push_back(static_cast<T>(v));
      } catch (const std::exception&) {
        throw ConfigError("config: " + key + " has non-integer entry '" + item + "'");
      }
    }
    return true;
  }

 private:
  const pt::ptree& tree_;
};

}  // namespace

ExperimentConfig ParseConfig(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    auto it = KnownKeys().find(section);
    if (it == KnownKeys().end()) throw ConfigError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) {
        throw ConfigError("config: unknown key " + section + "." + key);
      }
    }
  }

  Reader r(tree);
  ExperimentConfig c;
  DataConfig& d = c.data;
  r.Get("data.classes", d.num_classes);
  r.Get("data.dim", d.dim);
  r.Get("data.num_max", d.num_max);
  r.Get("data.gamma", d.gamma);
  r.Get("data.major_count", d.major_count);
  r.Get("data.spread", d.spread);
  r.Get("data.val_per_class", d.val_per_class);
  r.Get("data.test_per_class", d.test_per_class);
  r.Get("data.seed", d.seed);
  r.Get("data.train_csv", d.train_csv);
  r.Get("data.val_csv", d.val_csv);
  r.Get("data.test_csv", d.test_csv);
  r.GetNumbers("data.minority_classes", d.minority_classes);
  if (!d.synthetic() && (d.val_csv.empty() || d.test_csv.empty())) {
    throw ConfigError("config: data.train_csv requires data.val_csv and data.test_csv");
  }
  if (d.synthetic()) {
    LongTailSpec{d.num_classes, d.num_max, d.gamma, d.major_count}.Validate();
    if (d.minority_classes.empty())
      for (int y = d.major_count; y < d.num_classes; ++y) d.minority_classes.push_back(y);
  }

  PartitionConfig& p = c.partition;
  r.Get("partition.clients", p.num_clients);
  r.Get("partition.alpha_minor", p.alpha_minor);
  r.Get("partition.alpha_major", p.alpha_major);
  r.GetBool("partition.agglomerate", p.agglomerate);
  r.Get("partition.seed", p.seed);
  if (!r.GetNumbers("partition.minor_classes", p.minor_classes))
    p.minor_classes = d.minority_classes;

  ModelSpec& m = c.model;
  r.Get("model.hidden", m.hidden);
  r.Get("model.feat_dim", m.feat_dim);
  r.Get("model.proj_hidden", m.proj_hidden);
  r.Get("model.proj_dim", m.proj_dim);
  m.input_dim = d.dim;
  m.num_classes = d.num_classes;

  FederationConfig& f = c.federation;
  r.Get("loss.tau", f.loss.tau);
  r.Get("loss.t", f.loss.t);
  r.Get("loss.q", f.loss.q);
  r.Get("loss.k1", f.loss.k1);
  r.Get("loss.k2", f.loss.k2);
  r.GetBool("loss.local_prior", f.local_prior_margins);

  const auto modes = r.GetList("federation.modes");
  if (!modes.empty()) {
    c.modes.clear();
    for (const std::string& name : modes) c.modes.push_back(ParseMode(name));
  }
  r.GetNumbers("federation.seeds", c.seeds);
  if (c.seeds.empty()) throw ConfigError("config: federation.seeds is empty");
  r.Get("federation.rounds", f.rounds);
  r.Get("federation.local_epochs", f.local_epochs);
  r.Get("federation.batch_size", f.batch_size);
  r.Get("federation.client_fraction", f.client_fraction);
  std::string optimizer;
  r.Get("federation.optimizer", optimizer);
  if (!optimizer.empty()) f.optimizer.kind = ParseOptimizerKind(optimizer);
  r.Get("federation.lr", f.optimizer.learning_rate);
  r.Get("federation.momentum", f.optimizer.momentum);
  r.Get("federation.weight_decay", f.optimizer.weight_decay);
  r.Get("federation.threads", f.threads);
  r.Get("federation.noise_sigma", f.augment.noise_sigma);
  r.Get("federation.dropout_p", f.augment.dropout_p);

  r.GetBool("secureagg.enabled", f.secure);
  r.Get("secureagg.key_bits", f.key_bits);
  r.Get("secureagg.scale_bits", f.scale_bits);

  m.Validate();
  f.Validate();
  p.Validate(d.num_classes);
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

PreparedData PrepareData(const DataConfig& config) {
  PreparedData out;
  out.minority_classes = config.minority_classes;
  if (config.synthetic()) {
    const LongTailSpec spec{config.num_classes, config.num_max, config.gamma,
                            config.major_count};
    const Tensor means = BlobMeans(config.num_classes, config.dim, config.seed);
    const LabeledDataset pool =
        SampleBlobs(means, static_cast<std::size_t>(config.num_max), config.spread,
                    DeriveSeed(config.seed, {1}));
    out.train = SubsampleLongTail(pool, spec, DeriveSeed(config.seed, {2}));
    out.validation = SampleBlobs(means, config.val_per_class, config.spread,
                                 DeriveSeed(config.seed, {3}));
    out.test = SampleBlobs(means, config.test_per_class, config.spread,
                           DeriveSeed(config.seed, {4}));
    return out;
  }
  out.train = LoadCsv(config.train_csv);
  const int L = out.train.num_classes;
  out.validation = LoadCsv(config.val_csv, L);
  out.test = LoadCsv(config.test_csv, L);
  const int classes = std::max({L, out.validation.num_classes, out.test.num_classes});
  for (LabeledDataset* ds : {&out.train, &out.validation, &out.test}) {
    if (ds->dim != out.train.dim) throw DataError("datasets disagree on feature count");
    ds->num_classes = classes;
  }
  return out;
}

FederationData BuildFederationData(const PreparedData& data,
                                   const PartitionConfig& partition,
                                   L2PartitionOutput* split) {
  L2PartitionOutput out = L2Partition(data.train, partition);
  FederationData fd;
  for (const auto& idx : out.partition.clients) fd.clients.push_back(data.train.Subset(idx));
  fd.validation = data.validation;
  fd.test = data.test;
  fd.minority_classes = data.minority_classes;
  if (split) *split = std::move(out);
  return fd;
}

}  // namespace fediic
