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

#include <bit>
#include <fstream>
#include <iterator>
#include <string>

#include "fediic/errors.h"
#include "fediic/model.h"

namespace fediic {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are written in host byte order");

namespace {

constexpr const char* kFormat = "fediic-checkpoint";
constexpr int kVersion = 1;

nlohmann::json SpecToJson(const ModelSpec& s) {
  return {{"input_dim", s.input_dim},     {"hidden", s.hidden},
          {"feat_dim", s.feat_dim},       {"proj_hidden", s.proj_hidden},
          {"proj_dim", s.proj_dim},       {"num_classes", s.num_classes}};
}

ModelSpec SpecFromJson(const nlohmann::json& j) {
  ModelSpec s;
  s.input_dim = j.at("input_dim").get<std::size_t>();
  s.hidden = j.at("hidden").get<std::size_t>();
  s.feat_dim = j.at("feat_dim").get<std::size_t>();
  s.proj_hidden = j.at("proj_hidden").get<std::size_t>();
  s.proj_dim = j.at("proj_dim").get<std::size_t>();
  s.num_classes = j.at("num_classes").get<int>();
  return s;
}

}  // namespace

void SaveCheckpoint(const ModelParams& params, const std::string& path,
                    const nlohmann::json& metadata) {
  nlohmann::json manifest;
  manifest["format"] = kFormat;
  manifest["version"] = kVersion;
  manifest["dtype"] = "float64";
  manifest["endian"] = "little";
  manifest["spec"] = SpecToJson(params.spec());
  auto& tensors = manifest["tensors"] = nlohmann::json::array();
  for (std::size_t i = 0; i < params.tensors().size(); ++i) {
    tensors.push_back({{"name", std::string(ModelParams::Name(i))},
                       {"shape", params.tensors()[i].shape()}});
  }
  manifest["metadata"] = metadata;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  out << manifest.dump() << '\n';
  for (const Tensor& t : params.tensors()) {
    out.write(reinterpret_cast<const char*>(t.values().data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!out) throw DataError("short write to checkpoint '" + path + "'");
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw DataError("checkpoint: missing manifest");
  nlohmann::json manifest;
  ModelSpec spec;
  std::vector<Shape> shapes;
  try {
    manifest = nlohmann::json::parse(header);
    if (manifest.at("format") != kFormat) throw DataError("checkpoint: unknown format");
    if (manifest.at("version") != kVersion) {
      throw DataError("checkpoint: unsupported version " + manifest.at("version").dump());
    }
    if (manifest.at("dtype") != "float64" || manifest.at("endian") != "little") {
      throw DataError("checkpoint: payload must be little-endian float64");
    }
    spec = SpecFromJson(manifest.at("spec"));
    for (const auto& t : manifest.at("tensors")) shapes.push_back(t.at("shape").get<Shape>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint manifest: ") + e.what());
  }
  std::vector<Tensor> tensors;
  for (const Shape& shape : shapes) {
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.values().data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!in) throw DataError("checkpoint: truncated payload");
    tensors.push_back(std::move(t));
  }
  if (in.peek() != std::ifstream::traits_type::eof()) {
    throw DataError("checkpoint: trailing bytes after payload");
  }
  Checkpoint ckpt{FromTensors(spec, std::move(tensors)), manifest.value("metadata", nlohmann::json::object())};
  return ckpt;
}

}  // namespace fediic
