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

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cfsnn/autodiff/tensor.hpp"

namespace cfsnn::ad {

// [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);

// x[N,in] * w[out,in]^T (+ bias[out]) -> [N,out]
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias = {});

struct Conv2dDesc {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

// x[N,C,H,W] (*) w[O,C,k,k] (+ bias[O]) -> [N,O,Ho,Wo] with
// Ho = (H + 2p - k) / stride + 1. Zero padding, no dilation or groups.
Tensor conv2d(const Tensor& x, const Tensor& w, Conv2dDesc desc,
              const Tensor& bias = {});

std::size_t conv_output_extent(std::size_t in, std::size_t kernel,
                               std::size_t stride, std::size_t padding);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, real c);
Tensor add_scalar(const Tensor& a, real c);
// Sum of equally shaped tensors.
Tensor sum_all(std::span<const Tensor> parts);

Tensor reduce_sum(const Tensor& a);
Tensor reduce_mean(const Tensor& a);

Tensor exp(const Tensor& a);
// Requires strictly positive input.
Tensor log(const Tensor& a);
// Subgradient 0 at the kink.
Tensor abs(const Tensor& a);
Tensor sigmoid(const Tensor& a);
// Softmax over the last axis.
Tensor softmax(const Tensor& a);

Tensor reshape(const Tensor& a, const Shape& shape);
// Rows [begin, end) of the leading axis.
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
// Concatenation along the leading axis.
Tensor concat_rows(std::span<const Tensor> parts);
// Flat element `index` as a scalar tensor.
Tensor element(const Tensor& a, std::size_t index);

// Non-overlapping pooling over [N,C,H,W] with window = stride = k.
Tensor avg_pool2d(const Tensor& x, std::size_t k);
Tensor max_pool2d(const Tensor& x, std::size_t k);

// Per-element map whose backward is decoupled from its forward.
//
// forward(u, aux)       output value
// backward(u, aux)      factor multiplied into the upstream gradient
// backward_aux(u, aux)  partial of the output with respect to aux
//
// `aux` is an optional scalar tensor (for example a learnable surrogate
// steepness); it receives sum_i upstream_i * backward_aux(u_i, aux) when it
// requires a gradient. Without aux the rules see aux = 0.
template <class Fwd, class Bwd, class BwdAux>
Tensor custom_activation(const char* op, const Tensor& input, Fwd forward,
                         Bwd backward, BwdAux backward_aux,
                         const Tensor& aux = {});

template <class Fwd, class Bwd>
Tensor custom_activation(const char* op, const Tensor& input, Fwd forward,
                         Bwd backward) {
  return custom_activation(
      op, input, forward, backward, [](real, real) { return real(0); });
}

// --- implementation ---

namespace detail {
[[noreturn]] void throw_nonfinite_element(const char* op, const char* what,
                                          std::size_t index, real input);
}

template <class Fwd, class Bwd, class BwdAux>
Tensor custom_activation(const char* op, const Tensor& input, Fwd forward,
                         Bwd backward, BwdAux backward_aux, const Tensor& aux) {
  if (aux.defined() && aux.numel() != 1)
    throw ShapeError(std::string(op) + ": auxiliary parameter must be a scalar, "
                     "got shape " + aux.shape().str());
  const real a = aux.defined() ? aux.item() : real(0);
  const auto in = input.values();
  std::vector<real> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = forward(in[i], a);
    if (!std::isfinite(out[i]))
      detail::throw_nonfinite_element(op, "forward", i, in[i]);
  }
  Tensor result = Tensor::from(input.shape(), std::move(out));
  if (should_record({&input, &aux})) {
    Node* xn = input.node();
    Node* an = aux.defined() ? aux.node() : nullptr;
    Node* on = result.node();
    auto body = [=]() {
      const auto& g = on->grad;
      const auto& x = xn->value;
      if (xn->requires_grad) {
        auto& gx = xn->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
          const real d = backward(x[i], a);
          if (!std::isfinite(d))
            detail::throw_nonfinite_element(op, "backward", i, x[i]);
          gx[i] += g[i] * d;
        }
      }
      if (an && an->requires_grad) {
        real acc = 0;
        for (std::size_t i = 0; i < g.size(); ++i)
          if (g[i] != real(0)) acc += g[i] * backward_aux(x[i], a);
        an->grad_buffer()[0] += acc;
      }
    };
    if (an)
      record(op, {input, aux}, result, body);
    else
      record(op, {input}, result, body);
  }
  return result;
}

}  // namespace cfsnn::ad
