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

#include <algorithm>
#include <cmath>

#include "cfsnn/data/dataset.hpp"

namespace cfsnn::data {

EncodeMode parse_encode_mode(const std::string& s) {
  if (s == "direct") return EncodeMode::kDirect;
  if (s == "rate") return EncodeMode::kRate;
  if (s == "sequence") return EncodeMode::kSequence;
  throw ConfigError("unknown encoder mode '" + s +
                    "' (expected direct, rate or sequence)");
}

std::string to_string(EncodeMode m) {
  switch (m) {
    case EncodeMode::kDirect: return "direct";
    case EncodeMode::kRate: return "rate";
    case EncodeMode::kSequence: return "sequence";
  }
  return "?";
}

Shape step_shape(const Dataset& ds, const EncoderConfig& cfg) {
  if (cfg.steps == 0) throw ConfigError("encoder needs T >= 1");
  if (cfg.mode == EncodeMode::kSequence) {
    if (!ds.temporal)
      throw ConfigError("sequence encoding needs a temporal dataset");
    if (ds.sample_shape[0] != cfg.steps)
      throw ConfigError("dataset sequences have " +
                        std::to_string(ds.sample_shape[0]) +
                        " steps but the network runs T=" + std::to_string(cfg.steps));
    return ds.sample_shape.tail();
  }
  if (ds.temporal)
    throw ConfigError("temporal datasets need encoder.mode = sequence");
  return ds.sample_shape;
}

std::vector<real> encode_input(std::span<const real> x, const EncoderConfig& cfg,
                               Rng& rng) {
  const std::size_t T = cfg.steps;
  if (T == 0) throw ConfigError("encoder needs T >= 1");
  switch (cfg.mode) {
    case EncodeMode::kDirect: {
      std::vector<real> out;
      out.reserve(T * x.size());
      for (std::size_t t = 0; t < T; ++t) out.insert(out.end(), x.begin(), x.end());
      return out;
    }
    case EncodeMode::kRate: {
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] >= 0 && x[i] <= 1))
          throw Error("rate encoding needs values in [0, 1]; element " +
                      std::to_string(i) + " is " + std::to_string(x[i]));
      std::vector<real> out(T * x.size());
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t i = 0; i < x.size(); ++i)
          out[t * x.size() + i] = rng.bernoulli(x[i]) ? real(1) : real(0);
      return out;
    }
    case EncodeMode::kSequence:
      if (x.size() % T != 0)
        throw ShapeError("sequence of " + std::to_string(x.size()) +
                         " values does not split into T=" + std::to_string(T));
      return {x.begin(), x.end()};
  }
  return {};
}

ad::Tensor encode_batch(const Dataset& ds, std::span<const std::size_t> indices,
                        const EncoderConfig& cfg, Rng& rng) {
  const Shape step = step_shape(ds, cfg);
  const std::size_t T = cfg.steps, B = indices.size(), per = step.numel();
  std::vector<real> out(T * B * per);
  for (std::size_t b = 0; b < B; ++b) {
    if (indices[b] >= ds.size())
      throw std::out_of_range("sample index " + std::to_string(indices[b]) +
                              " beyond dataset of " + std::to_string(ds.size()));
    const auto enc = encode_input(ds.sample(indices[b]), cfg, rng);
    for (std::size_t t = 0; t < T; ++t)
      std::copy_n(enc.begin() + static_cast<std::ptrdiff_t>(t * per), per,
                  out.begin() + static_cast<std::ptrdiff_t>((t * B + b) * per));
  }
  return ad::Tensor::from(step.prepend(T * B), std::move(out));
}

NoiseSpec NoiseSpec::parse(const std::string& s) {
  NoiseSpec n;
  if (s.empty() || s == "none") return n;
  const auto colon = s.find(':');
  if (colon == std::string::npos)
    throw ConfigError("noise '" + s + "' must look like kind:epsilon");
  const std::string kind = s.substr(0, colon);
  if (kind == "uniform")
    n.kind = NoiseKind::kUniform;
  else if (kind == "salt_pepper")
    n.kind = NoiseKind::kSaltPepper;
  else if (kind == "gaussian")
    n.kind = NoiseKind::kGaussian;
  else
    throw ConfigError("unknown noise kind '" + kind +
                      "' (expected uniform, salt_pepper or gaussian)");
  try {
    std::size_t used = 0;
    n.epsilon = static_cast<real>(std::stod(s.substr(colon + 1), &used));
    if (used != s.size() - colon - 1) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw ConfigError("noise intensity in '" + s + "' is not a number");
  }
  n.validate();
  return n;
}

std::string NoiseSpec::str() const {
  switch (kind) {
    case NoiseKind::kNone: return "none";
    case NoiseKind::kUniform: return "uniform:" + std::to_string(epsilon);
    case NoiseKind::kSaltPepper: return "salt_pepper:" + std::to_string(epsilon);
    case NoiseKind::kGaussian: return "gaussian:" + std::to_string(epsilon);
  }
  return "?";
}

void NoiseSpec::validate() const {
  if (!(epsilon >= 0)) throw ConfigError("noise intensity must be >= 0");
  if (kind == NoiseKind::kSaltPepper && epsilon > 1)
    throw ConfigError("salt_pepper intensity is a fraction and must be <= 1");
}

void inject_noise(std::span<real> x, const NoiseSpec& noise, Rng& rng,
                  bool bounded, real lo, real hi) {
  noise.validate();
  if (noise.kind == NoiseKind::kNone || noise.epsilon == 0) return;
  const double eps = noise.epsilon;
  switch (noise.kind) {
    case NoiseKind::kUniform:
      for (auto& v : x) v += static_cast<real>(eps * rng.uniform(-1, 1));
      break;
    case NoiseKind::kGaussian:
      for (auto& v : x) v += static_cast<real>(eps * rng.normal());
      break;
    case NoiseKind::kSaltPepper:
      if (!bounded)
        throw ConfigError("salt_pepper noise needs data with a declared range");
      for (auto& v : x)
        if (rng.bernoulli(eps)) v = rng.bernoulli(0.5) ? hi : lo;
      break;
    case NoiseKind::kNone:
      break;
  }
  if (bounded)
    for (auto& v : x) v = std::clamp(v, lo, hi);
}

Dataset with_noise(const Dataset& ds, const NoiseSpec& noise, std::uint64_t seed) {
  Dataset out = ds;
  Rng rng = Rng(seed).split(0x6e6f697365ULL);
  inject_noise(out.features, noise, rng, out.bounded, out.lo, out.hi);
  return out;
}

void augment_flip_crop(std::span<real> sample, const Shape& shape,
                       std::size_t pad, Rng& rng) {
  if (shape.rank() != 3) throw ShapeError("augment: samples must be [C, H, W]");
  const std::size_t c = shape[0], h = shape[1], w = shape[2];
  const bool flip = rng.bernoulli(0.5);
  const long dy = static_cast<long>(rng.below(2 * pad + 1)) - static_cast<long>(pad);
  const long dx = static_cast<long>(rng.below(2 * pad + 1)) - static_cast<long>(pad);
  std::vector<real> src(sample.begin(), sample.end());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        const long si = static_cast<long>(i) + dy;
        long sj = static_cast<long>(j) + dx;
        if (flip) sj = static_cast<long>(w) - 1 - sj;
        real v = 0;
        if (si >= 0 && si < static_cast<long>(h) && sj >= 0 && sj < static_cast<long>(w))
          v = src[(ch * h + static_cast<std::size_t>(si)) * w + static_cast<std::size_t>(sj)];
        sample[(ch * h + i) * w + j] = v;
      }
}

}  // namespace cfsnn::data
