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

#include "cfsnn/autodiff/tdbn.hpp"

#include <cmath>

namespace cfsnn::ad {

Tensor tdbn_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                    real theta, real eps, bool training,
                    BnRunningStats* running) {
  const Shape& s = x.shape();
  if (s.rank() < 2)
    throw ShapeError("tdbn: input must have a channel axis, got " + s.str());
  const std::size_t n = s[0], c = s[1];
  const std::size_t inner = s.numel() / (n * c);
  const std::size_t count = n * inner;
  if (gamma.numel() != c || beta.numel() != c)
    throw ShapeError("tdbn: gamma/beta " + gamma.shape().str() + "/" +
                     beta.shape().str() + " for " + std::to_string(c) +
                     " channels");
  if (running && (running->mean.size() != c || running->var.size() != c))
    throw ShapeError("tdbn: running statistics sized for " +
                     std::to_string(running->mean.size()) + " channels, input has " +
                     std::to_string(c));
  if (training && count < 2)
    throw NumericError(
        "tdbn: per-channel statistics over a single element are undefined; "
        "increase the batch x time product");
  if (!training && !running)
    throw StateError("tdbn: eval mode requires running statistics");

  const auto xv = x.values();
  auto at = [c, inner](std::size_t i, std::size_t ch, std::size_t j) {
    return (i * c + ch) * inner + j;
  };

  std::vector<real> mean(c), inv_std(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    real m, v;
    if (training) {
      real acc = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < inner; ++j) acc += xv[at(i, ch, j)];
      m = acc / static_cast<real>(count);
      real sq = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < inner; ++j) {
          const real d = xv[at(i, ch, j)] - m;
          sq += d * d;
        }
      v = sq / static_cast<real>(count);
      if (running) {
        const real mom = running->momentum;
        running->mean[ch] = (1 - mom) * running->mean[ch] + mom * m;
        running->var[ch] = (1 - mom) * running->var[ch] + mom * v;
      }
    } else {
      m = running->mean[ch];
      v = running->var[ch];
    }
    mean[ch] = m;
    inv_std[ch] = real(1) / std::sqrt(v + eps);
  }

  const auto gv = gamma.values(), bv = beta.values();
  std::vector<real> y(xv.size());
  std::vector<real> xhat(xv.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t j = 0; j < inner; ++j) {
        const std::size_t k = at(i, ch, j);
        xhat[k] = (xv[k] - mean[ch]) * inv_std[ch];
        y[k] = theta * gv[ch] * xhat[k] + bv[ch];
      }
  Tensor out = make_output("tdbn", s, std::move(y));
  if (should_record({&x, &gamma, &beta})) {
    Node* xn = x.node();
    Node* gn = gamma.node();
    Node* bn = beta.node();
    Node* on = out.node();
    auto xh = std::make_shared<std::vector<real>>(std::move(xhat));
    record("tdbn", {x, gamma, beta}, out, [=]() {
      const auto& g = on->grad;
      const auto& xhr = *xh;
      for (std::size_t ch = 0; ch < c; ++ch) {
        real sum_g = 0, sum_gx = 0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < inner; ++j) {
            const std::size_t k = at(i, ch, j);
            sum_g += g[k];
            sum_gx += g[k] * xhr[k];
          }
        if (gn->requires_grad) gn->grad_buffer()[ch] += theta * sum_gx;
        if (bn->requires_grad) bn->grad_buffer()[ch] += sum_g;
        if (!xn->requires_grad) continue;
        auto& gx = xn->grad_buffer();
        const real scale = theta * gn->value[ch] * inv_std[ch];
        if (training) {
          const real mg = sum_g / static_cast<real>(count);
          const real mgx = sum_gx / static_cast<real>(count);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < inner; ++j) {
              const std::size_t k = at(i, ch, j);
              gx[k] += scale * (g[k] - mg - xhr[k] * mgx);
            }
        } else {
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < inner; ++j) {
              const std::size_t k = at(i, ch, j);
              gx[k] += scale * g[k];
            }
        }
      }
    });
  }
  return out;
}

}  // namespace cfsnn::ad
