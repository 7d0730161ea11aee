// Copyright 2026 The cfsnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cfsnn/train/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace cfsnn::train {

using json = nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are written in native little-endian order");

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

json blob_index(const std::vector<Blob>& blobs) {
  json arr = json::array();
  for (const auto& b : blobs) arr.push_back({{"name", b.name}, {"size", b.values.size()}});
  return arr;
}

}  // namespace

Checkpoint snapshot(Network& net, std::size_t epoch, const Rng::State& rng,
                    json extra) {
  Checkpoint c;
  c.spec = net.spec();
  c.sample_shape = net.sample_shape();
  c.epoch = epoch;
  c.rng = rng;
  c.extra = std::move(extra);
  for (const auto* p : net.parameters()) {
    const auto v = p->tensor.values();
    c.params.push_back({p->name, {v.begin(), v.end()}});
    c.momenta.push_back({p->name, {p->momentum.begin(), p->momentum.end()}});
  }
  for (const auto& b : net.buffers())
    c.buffers.push_back({b.name, {b.data->begin(), b.data->end()}});
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json meta;
  meta["network"] = to_json(ckpt.spec);
  meta["sample_shape"] = ckpt.sample_shape.dims();
  meta["epoch"] = ckpt.epoch;
  meta["rng"] = std::vector<std::uint64_t>(ckpt.rng.begin(), ckpt.rng.end());
  meta["extra"] = ckpt.extra;
  meta["params"] = blob_index(ckpt.params);
  meta["momenta"] = blob_index(ckpt.momenta);
  meta["buffers"] = blob_index(ckpt.buffers);
  const std::string text = meta.dump();

  std::string out(kCheckpointMagic, 8);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  for (const auto* group : {&ckpt.params, &ckpt.momenta, &ckpt.buffers})
    for (const auto& b : *group)
      out.append(reinterpret_cast<const char*>(b.values.data()),
                 b.values.size() * sizeof(double));

  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write checkpoint '" + tmp + "'");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failed for checkpoint '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into '" + path + "': " + ec.message());
}

void save_checkpoint(const std::string& path, Network& net, std::size_t epoch,
                     const Rng::State& rng, json extra) {
  save_checkpoint(path, snapshot(net, epoch, rng, std::move(extra)));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint '" + path + "'");
  const std::string in{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  if (in.size() < 16)
    throw FormatError(path + ": truncated checkpoint header (" +
                      std::to_string(in.size()) + " bytes)");
  if (std::memcmp(in.data(), kCheckpointMagic, 8) != 0)
    throw FormatError(path + ": bad checkpoint magic, expected SNNCKPT1, found '" +
                      in.substr(0, 8) + "'");
  const std::uint32_t version = get_u32(in, 8);
  if (version != kCheckpointVersion)
    throw FormatError(path + ": incompatible checkpoint version, expected " +
                      std::to_string(kCheckpointVersion) + ", found " +
                      std::to_string(version));
  const std::size_t meta_len = get_u32(in, 12);
  if (in.size() < 16 + meta_len)
    throw FormatError(path + ": truncated checkpoint metadata");

  Checkpoint c;
  std::size_t at = 16 + meta_len;
  try {
    const json meta = json::parse(in.substr(16, meta_len));
    c.spec = network_from_json(meta.at("network"));
    const auto dims = meta.at("sample_shape").get<std::vector<std::size_t>>();
    c.sample_shape = Shape(std::span<const std::size_t>(dims));
    c.epoch = meta.at("epoch").get<std::size_t>();
    const auto rng = meta.at("rng").get<std::vector<std::uint64_t>>();
    if (rng.size() != 4) throw FormatError("rng state must have 4 words");
    std::copy(rng.begin(), rng.end(), c.rng.begin());
    c.extra = meta.value("extra", json::object());
    auto read_group = [&](const char* key, std::vector<Blob>& group) {
      for (const auto& entry : meta.at(key)) {
        Blob b;
        b.name = entry.at("name").get<std::string>();
        const std::size_t n = entry.at("size").get<std::size_t>();
        if (in.size() < at + n * sizeof(double))
          throw FormatError("truncated payload in blob '" + b.name + "'");
        b.values.resize(n);
        std::memcpy(b.values.data(), in.data() + at, n * sizeof(double));
        at += n * sizeof(double);
        group.push_back(std::move(b));
      }
    };
    read_group("params", c.params);
    read_group("momenta", c.momenta);
    read_group("buffers", c.buffers);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  } catch (const json::exception& e) {
    throw FormatError(path + ": malformed checkpoint metadata: " + e.what());
  } catch (const Error& e) {
    throw FormatError(path + ": invalid checkpoint contents: " + e.what());
  }
  if (at != in.size())
    throw FormatError(path + ": " + std::to_string(in.size() - at) +
                      " trailing bytes after the last blob");
  return c;
}

void restore(const Checkpoint& ckpt, Network& net) {
  auto params = net.parameters();
  auto buffers = net.buffers();
  if (params.size() != ckpt.params.size() || params.size() != ckpt.momenta.size())
    throw FormatError("checkpoint holds " + std::to_string(ckpt.params.size()) +
                      " parameters, network has " + std::to_string(params.size()));
  if (buffers.size() != ckpt.buffers.size())
    throw FormatError("checkpoint holds " + std::to_string(ckpt.buffers.size()) +
                      " buffers, network has " + std::to_string(buffers.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->name != ckpt.params[i].name ||
        params[i]->tensor.numel() != ckpt.params[i].values.size() ||
        ckpt.momenta[i].values.size() != ckpt.params[i].values.size())
      throw FormatError("checkpoint parameter '" + ckpt.params[i].name +
                        "' does not match network parameter '" + params[i]->name + "'");
  }
  for (std::size_t i = 0; i < buffers.size(); ++i)
    if (buffers[i].name != ckpt.buffers[i].name ||
        buffers[i].data->size() != ckpt.buffers[i].values.size())
      throw FormatError("checkpoint buffer '" + ckpt.buffers[i].name +
                        "' does not match network buffer '" + buffers[i].name + "'");

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i]->tensor.mutable_values();
    for (std::size_t j = 0; j < w.size(); ++j)
      w[j] = static_cast<real>(ckpt.params[i].values[j]);
    params[i]->momentum.assign(ckpt.momenta[i].values.begin(),
                               ckpt.momenta[i].values.end());
  }
  for (std::size_t i = 0; i < buffers.size(); ++i)
    buffers[i].data->assign(ckpt.buffers[i].values.begin(),
                            ckpt.buffers[i].values.end());
}

Network network_from_checkpoint(const Checkpoint& ckpt) {
  Network net(ckpt.spec, ckpt.sample_shape, 0);
  restore(ckpt, net);
  return net;
}

}  // namespace cfsnn::train
