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

#include "cfsnn/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cfsnn/kernels/kernels.hpp"

namespace cfsnn::ad {

namespace detail {
void throw_nonfinite_element(const char* op, const char* what,
                             std::size_t index, real input) {
  throw NumericError(std::string(op) + ": " + what +
                     " rule produced a non-finite value at element " +
                     std::to_string(index) + " (input " +
                     std::to_string(input) + ")");
}
}  // namespace detail

namespace {

const kernels::Table& K() { return kernels::active(); }

std::vector<real> transpose(std::span<const real> a, std::size_t rows,
                            std::size_t cols) {
  std::vector<real> t(a.size());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) t[j * rows + i] = a[i * cols + j];
  return t;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (!(a.shape() == b.shape()))
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() +
                     " vs " + b.shape().str());
}

template <class F, class D>
Tensor unary(const char* op, const Tensor& a, F f, D dfdx) {
  const auto x = a.values();
  std::vector<real> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  Tensor r = make_output(op, a.shape(), std::move(out));
  if (should_record({&a})) {
    Node* an = a.node();
    Node* on = r.node();
    record(op, {a}, r, [=]() {
      if (!an->requires_grad) return;
      auto& g = an->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] += on->grad[i] * dfdx(an->value[i], on->value[i]);
    });
  }
  return r;
}

}  // namespace

std::size_t conv_output_extent(std::size_t in, std::size_t kernel,
                               std::size_t stride, std::size_t padding) {
  if (stride == 0) throw ShapeError("conv2d: stride must be positive");
  if (in + 2 * padding < kernel)
    throw ShapeError("conv2d: kernel " + std::to_string(kernel) +
                     " larger than padded input " +
                     std::to_string(in + 2 * padding));
  return (in + 2 * padding - kernel) / stride + 1;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.shape().rank() != 2 || b.shape().rank() != 2 ||
      a.shape()[1] != b.shape()[0])
    throw ShapeError("matmul: incompatible shapes " + a.shape().str() + " x " +
                     b.shape().str());
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  std::vector<real> c(m * n);
  K().gemm_nn(m, n, k, a.values().data(), b.values().data(), c.data(), false);
  Tensor r = make_output("matmul", Shape{m, n}, std::move(c));
  if (should_record({&a, &b})) {
    Node* an = a.node();
    Node* bn = b.node();
    Node* on = r.node();
    record("matmul", {a, b}, r, [=]() {
      const auto& g = on->grad;
      if (an->requires_grad) {
        auto bt = transpose(bn->value, k, n);
        K().gemm_nn(m, k, n, g.data(), bt.data(), an->grad_buffer().data(), true);
      }
      if (bn->requires_grad) {
        auto at = transpose(an->value, m, k);
        K().gemm_nn(k, n, m, at.data(), g.data(), bn->grad_buffer().data(), true);
      }
    });
  }
  return r;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
  if (x.shape().rank() != 2 || w.shape().rank() != 2 ||
      x.shape()[1] != w.shape()[1])
    throw ShapeError("linear: input " + x.shape().str() +
                     " incompatible with weight " + w.shape().str());
  const std::size_t n = x.shape()[0], in = x.shape()[1], out = w.shape()[0];
  if (bias.defined() && bias.numel() != out)
    throw ShapeError("linear: bias " + bias.shape().str() + " for " +
                     std::to_string(out) + " outputs");
  const auto wt = transpose(w.values(), out, in);
  std::vector<real> y(n * out);
  if (bias.defined())
    for (std::size_t i = 0; i < n; ++i)
      std::copy(bias.values().begin(), bias.values().end(), y.begin() + i * out);
  K().gemm_nn(n, out, in, x.values().data(), wt.data(), y.data(), bias.defined());
  Tensor r = make_output("linear", Shape{n, out}, std::move(y));
  if (should_record({&x, &w, &bias})) {
    Node* xn = x.node();
    Node* wn = w.node();
    Node* bn = bias.defined() ? bias.node() : nullptr;
    Node* on = r.node();
    auto fn = [=]() {
      const auto& g = on->grad;
      if (xn->requires_grad)
        K().gemm_nn(n, in, out, g.data(), wn->value.data(),
                    xn->grad_buffer().data(), true);
      if (wn->requires_grad) {
        auto gt = transpose(g, n, out);
        K().gemm_nn(out, in, n, gt.data(), xn->value.data(),
                    wn->grad_buffer().data(), true);
      }
      if (bn && bn->requires_grad) {
        auto& gb = bn->grad_buffer();
        for (std::size_t i = 0; i < n; ++i)
          K().add(out, gb.data(), g.data() + i * out, gb.data());
      }
    };
    if (bn)
      record("linear", {x, w, bias}, r, fn);
    else
      record("linear", {x, w}, r, fn);
  }
  return r;
}

namespace {

struct ConvGeom {
  std::size_t n, c, h, w, o, k, stride, pad, ho, wo;
  std::size_t ckk() const { return c * k * k; }
  std::size_t plane() const { return ho * wo; }
};

// cols[(ci*k + ki)*k + kj][sample*plane + oy*wo + ox]
std::vector<real> im2col(const ConvGeom& g, std::span<const real> x) {
  const std::size_t cols_n = g.n * g.plane();
  std::vector<real> cols(g.ckk() * cols_n, real(0));
  for (std::size_t ci = 0; ci < g.c; ++ci)
    for (std::size_t ki = 0; ki < g.k; ++ki)
      for (std::size_t kj = 0; kj < g.k; ++kj) {
        real* row = cols.data() + ((ci * g.k + ki) * g.k + kj) * cols_n;
        for (std::size_t s = 0; s < g.n; ++s) {
          const real* img = x.data() + (s * g.c + ci) * g.h * g.w;
          real* dst = row + s * g.plane();
          for (std::size_t oy = 0; oy < g.ho; ++oy) {
            const std::ptrdiff_t iy =
                static_cast<std::ptrdiff_t>(oy * g.stride + ki) -
                static_cast<std::ptrdiff_t>(g.pad);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
            for (std::size_t ox = 0; ox < g.wo; ++ox) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox * g.stride + kj) -
                  static_cast<std::ptrdiff_t>(g.pad);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
              dst[oy * g.wo + ox] = img[iy * g.w + ix];
            }
          }
        }
      }
  return cols;
}

void col2im(const ConvGeom& g, std::span<const real> cols, std::span<real> dx) {
  const std::size_t cols_n = g.n * g.plane();
  for (std::size_t ci = 0; ci < g.c; ++ci)
    for (std::size_t ki = 0; ki < g.k; ++ki)
      for (std::size_t kj = 0; kj < g.k; ++kj) {
        const real* row = cols.data() + ((ci * g.k + ki) * g.k + kj) * cols_n;
        for (std::size_t s = 0; s < g.n; ++s) {
          real* img = dx.data() + (s * g.c + ci) * g.h * g.w;
          const real* src = row + s * g.plane();
          for (std::size_t oy = 0; oy < g.ho; ++oy) {
            const std::ptrdiff_t iy =
                static_cast<std::ptrdiff_t>(oy * g.stride + ki) -
                static_cast<std::ptrdiff_t>(g.pad);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
            for (std::size_t ox = 0; ox < g.wo; ++ox) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox * g.stride + kj) -
                  static_cast<std::ptrdiff_t>(g.pad);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
              img[iy * g.w + ix] += src[oy * g.wo + ox];
            }
          }
        }
      }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, Conv2dDesc desc,
              const Tensor& bias) {
  if (x.shape().rank() != 4)
    throw ShapeError("conv2d: input must be [batch, channels, H, W], got " +
                     x.shape().str());
  if (w.shape().rank() != 4 || w.shape()[1] != x.shape()[1] ||
      w.shape()[2] != w.shape()[3])
    throw ShapeError("conv2d: weight " + w.shape().str() +
                     " incompatible with input " + x.shape().str());
  ConvGeom g{};
  g.n = x.shape()[0];
  g.c = x.shape()[1];
  g.h = x.shape()[2];
  g.w = x.shape()[3];
  g.o = w.shape()[0];
  g.k = w.shape()[2];
  g.stride = desc.stride;
  g.pad = desc.padding;
  g.ho = conv_output_extent(g.h, g.k, g.stride, g.pad);
  g.wo = conv_output_extent(g.w, g.k, g.stride, g.pad);
  if (bias.defined() && bias.numel() != g.o)
    throw ShapeError("conv2d: bias " + bias.shape().str() + " for " +
                     std::to_string(g.o) + " output channels");

  auto cols = std::make_shared<std::vector<real>>(im2col(g, x.values()));
  const std::size_t cols_n = g.n * g.plane();
  std::vector<real> big(g.o * cols_n);
  K().gemm_nn(g.o, cols_n, g.ckk(), w.values().data(), cols->data(), big.data(),
              false);
  std::vector<real> y(g.n * g.o * g.plane());
  for (std::size_t s = 0; s < g.n; ++s)
    for (std::size_t oc = 0; oc < g.o; ++oc) {
      const real* src = big.data() + oc * cols_n + s * g.plane();
      real* dst = y.data() + (s * g.o + oc) * g.plane();
      const real b = bias.defined() ? bias.values()[oc] : real(0);
      for (std::size_t p = 0; p < g.plane(); ++p) dst[p] = src[p] + b;
    }
  Tensor r = make_output("conv2d", Shape{g.n, g.o, g.ho, g.wo}, std::move(y));
  if (should_record({&x, &w, &bias})) {
    Node* xn = x.node();
    Node* wn = w.node();
    Node* bn = bias.defined() ? bias.node() : nullptr;
    Node* on = r.node();
    auto fn = [=]() {
      const auto& gy = on->grad;
      // gy[N,O,plane] -> gbig[O, N*plane]
      std::vector<real> gbig(g.o * cols_n);
      for (std::size_t s = 0; s < g.n; ++s)
        for (std::size_t oc = 0; oc < g.o; ++oc)
          std::copy_n(gy.data() + (s * g.o + oc) * g.plane(), g.plane(),
                      gbig.data() + oc * cols_n + s * g.plane());
      if (wn->requires_grad) {
        // dW^T[ckk, O] = cols[ckk, M] * gbig^T[M, O]
        auto gbt = transpose(gbig, g.o, cols_n);
        std::vector<real> dwt(g.ckk() * g.o);
        K().gemm_nn(g.ckk(), g.o, cols_n, cols->data(), gbt.data(), dwt.data(),
                    false);
        auto dw = transpose(dwt, g.ckk(), g.o);
        accumulate(wn, dw);
      }
      if (xn->requires_grad) {
        auto wt = transpose(wn->value, g.o, g.ckk());
        std::vector<real> dcols(g.ckk() * cols_n);
        K().gemm_nn(g.ckk(), cols_n, g.o, wt.data(), gbig.data(), dcols.data(),
                    false);
        col2im(g, dcols, xn->grad_buffer());
      }
      if (bn && bn->requires_grad) {
        auto& gb = bn->grad_buffer();
        for (std::size_t oc = 0; oc < g.o; ++oc)
          gb[oc] += K().sum(cols_n, gbig.data() + oc * cols_n);
      }
    };
    if (bn)
      record("conv2d", {x, w, bias}, r, fn);
    else
      record("conv2d", {x, w}, r, fn);
  }
  return r;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  std::vector<real> out(a.numel());
  K().add(out.size(), a.values().data(), b.values().data(), out.data());
  Tensor r = make_output("add", a.shape(), std::move(out));
  if (should_record({&a, &b})) {
    Node* an = a.node();
    Node* bn = b.node();
    Node* on = r.node();
    record("add", {a, b}, r, [=]() {
      accumulate(an, on->grad);
      accumulate(bn, on->grad);
    });
  }
  return r;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  std::vector<real> out(a.numel());
  const auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  Tensor r = make_output("sub", a.shape(), std::move(out));
  if (should_record({&a, &b})) {
    Node* an = a.node();
    Node* bn = b.node();
    Node* on = r.node();
    record("sub", {a, b}, r, [=]() {
      accumulate(an, on->grad);
      if (bn->requires_grad)
        K().axpy(on->grad.size(), real(-1), on->grad.data(),
                 bn->grad_buffer().data());
    });
  }
  return r;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  std::vector<real> out(a.numel());
  K().mul(out.size(), a.values().data(), b.values().data(), out.data());
  Tensor r = make_output("mul", a.shape(), std::move(out));
  if (should_record({&a, &b})) {
    Node* an = a.node();
    Node* bn = b.node();
    Node* on = r.node();
    record("mul", {a, b}, r, [=]() {
      const std::size_t n = on->grad.size();
      if (an->requires_grad)
        K().mul_acc(n, on->grad.data(), bn->value.data(),
                    an->grad_buffer().data());
      if (bn->requires_grad)
        K().mul_acc(n, on->grad.data(), an->value.data(),
                    bn->grad_buffer().data());
    });
  }
  return r;
}

Tensor scale(const Tensor& a, real c) {
  std::vector<real> out(a.numel());
  K().scale(out.size(), c, a.values().data(), out.data());
  Tensor r = make_output("scale", a.shape(), std::move(out));
  if (should_record({&a})) {
    Node* an = a.node();
    Node* on = r.node();
    record("scale", {a}, r, [=]() {
      K().axpy(on->grad.size(), c, on->grad.data(), an->grad_buffer().data());
    });
  }
  return r;
}

Tensor add_scalar(const Tensor& a, real c) {
  return unary(
      "add_scalar", a, [c](real x) { return x + c; },
      [](real, real) { return real(1); });
}

Tensor sum_all(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("sum_all: no operands");
  std::vector<real> out(parts[0].values().begin(), parts[0].values().end());
  for (std::size_t i = 1; i < parts.size(); ++i) {
    require_same_shape("sum_all", parts[0], parts[i]);
    K().add(out.size(), out.data(), parts[i].values().data(), out.data());
  }
  Tensor r = make_output("sum_all", parts[0].shape(), std::move(out));
  if (should_record(parts)) {
    std::vector<Node*> ns;
    for (const auto& p : parts) ns.push_back(p.node());
    Node* on = r.node();
    record("sum_all", parts, r, [=]() {
      for (Node* n : ns) accumulate(n, on->grad);
    });
  }
  return r;
}

Tensor reduce_sum(const Tensor& a) {
  const real s = K().sum(a.numel(), a.values().data());
  Tensor r = make_output("reduce_sum", Shape{}, {s});
  if (should_record({&a})) {
    Node* an = a.node();
    Node* on = r.node();
    record("reduce_sum", {a}, r, [=]() {
      if (!an->requires_grad) return;
      auto& g = an->grad_buffer();
      const real up = on->grad[0];
      for (auto& x : g) x += up;
    });
  }
  return r;
}

Tensor reduce_mean(const Tensor& a) {
  const real inv = real(1) / static_cast<real>(a.numel());
  const real s = K().sum(a.numel(), a.values().data()) * inv;
  Tensor r = make_output("reduce_mean", Shape{}, {s});
  if (should_record({&a})) {
    Node* an = a.node();
    Node* on = r.node();
    record("reduce_mean", {a}, r, [=]() {
      if (!an->requires_grad) return;
      auto& g = an->grad_buffer();
      const real up = on->grad[0] * inv;
      for (auto& x : g) x += up;
    });
  }
  return r;
}

Tensor exp(const Tensor& a) {
  return unary(
      "exp", a, [](real x) { return std::exp(x); },
      [](real, real y) { return y; });
}

Tensor log(const Tensor& a) {
  for (std::size_t i = 0; i < a.numel(); ++i)
    if (!(a.values()[i] > real(0)))
      throw NumericError("log: non-positive input " +
                         std::to_string(a.values()[i]) + " at element " +
                         std::to_string(i));
  return unary(
      "log", a, [](real x) { return std::log(x); },
      [](real x, real) { return real(1) / x; });
}

Tensor abs(const Tensor& a) {
  return unary(
      "abs", a, [](real x) { return std::abs(x); },
      [](real x, real) {
        return x > 0 ? real(1) : (x < 0 ? real(-1) : real(0));
      });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      "sigmoid", a, [](real x) { return real(1) / (real(1) + std::exp(-x)); },
      [](real, real y) { return y * (real(1) - y); });
}

Tensor softmax(const Tensor& a) {
  if (a.shape().rank() == 0) throw ShapeError("softmax: scalar input");
  const std::size_t cols = a.shape()[a.shape().rank() - 1];
  const std::size_t rows = a.numel() / cols;
  const auto x = a.values();
  std::vector<real> y(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const real* xr = x.data() + r * cols;
    real* yr = y.data() + r * cols;
    const real m = *std::max_element(xr, xr + cols);
    real z = 0;
    for (std::size_t j = 0; j < cols; ++j) z += (yr[j] = std::exp(xr[j] - m));
    for (std::size_t j = 0; j < cols; ++j) yr[j] /= z;
  }
  Tensor out = make_output("softmax", a.shape(), std::move(y));
  if (should_record({&a})) {
    Node* an = a.node();
    Node* on = out.node();
    record("softmax", {a}, out, [=]() {
      auto& gx = an->grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        const real* yr = on->value.data() + r * cols;
        const real* gr = on->grad.data() + r * cols;
        const real d = K().dot(cols, yr, gr);
        for (std::size_t j = 0; j < cols; ++j)
          gx[r * cols + j] += yr[j] * (gr[j] - d);
      }
    });
  }
  return out;
}

Tensor reshape(const Tensor& a, const Shape& shape) {
  if (shape.numel() != a.numel())
    throw ShapeError("reshape: cannot view " + a.shape().str() + " as " +
                     shape.str());
  Tensor r = Tensor::from(shape, {a.values().begin(), a.values().end()});
  if (should_record({&a})) {
    Node* an = a.node();
    Node* on = r.node();
    record("reshape", {a}, r, [=]() { accumulate(an, on->grad); });
  }
  return r;
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  if (a.shape().rank() == 0 || begin >= end || end > a.shape()[0])
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") invalid for " + a.shape().str());
  const std::size_t row = a.numel() / a.shape()[0];
  std::vector<real> out(a.values().begin() + begin * row,
                        a.values().begin() + end * row);
  Tensor r = Tensor::from(a.shape().with_leading(end - begin), std::move(out));
  if (should_record({&a})) {
    Node* an = a.node();
    Node* on = r.node();
    record("slice_rows", {a}, r, [=]() {
      auto& g = an->grad_buffer();
      K().add(on->grad.size(), g.data() + begin * row, on->grad.data(),
              g.data() + begin * row);
    });
  }
  return r;
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no operands");
  const Shape tail = parts[0].shape().tail();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (!(p.shape().tail() == tail))
      throw ShapeError("concat_rows: shape mismatch " + parts[0].shape().str() +
                       " vs " + p.shape().str());
    rows += p.shape()[0];
  }
  std::vector<real> out;
  out.reserve(rows * tail.numel());
  for (const auto& p : parts)
    out.insert(out.end(), p.values().begin(), p.values().end());
  Tensor r = Tensor::from(parts[0].shape().with_leading(rows), std::move(out));
  if (should_record(parts)) {
    std::vector<Node*> ns;
    for (const auto& p : parts) ns.push_back(p.node());
    Node* on = r.node();
    record("concat_rows", parts, r, [=]() {
      std::size_t off = 0;
      for (Node* n : ns) {
        const std::size_t len = n->value.size();
        accumulate(n, std::span<const real>(on->grad.data() + off, len));
        off += len;
      }
    });
  }
  return r;
}

Tensor element(const Tensor& a, std::size_t index) {
  if (index >= a.numel())
    throw ShapeError("element: index " + std::to_string(index) +
                     " out of range for " + a.shape().str());
  Tensor r = Tensor::from(Shape{}, {a.values()[index]});
  if (should_record({&a})) {
    Node* an = a.node();
    Node* on = r.node();
    record("element", {a}, r,
           [=]() { an->grad_buffer()[index] += on->grad[0]; });
  }
  return r;
}

namespace {
void check_pool(const char* op, const Tensor& x, std::size_t k) {
  if (x.shape().rank() != 4)
    throw ShapeError(std::string(op) + ": input must be rank 4, got " +
                     x.shape().str());
  if (k == 0 || x.shape()[2] % k || x.shape()[3] % k)
    throw ShapeError(std::string(op) + ": window " + std::to_string(k) +
                     " does not tile " + x.shape().str());
}
}  // namespace

Tensor avg_pool2d(const Tensor& x, std::size_t k) {
  check_pool("avg_pool2d", x, k);
  const std::size_t nc = x.shape()[0] * x.shape()[1];
  const std::size_t h = x.shape()[2], w = x.shape()[3], ho = h / k, wo = w / k;
  const real inv = real(1) / static_cast<real>(k * k);
  std::vector<real> y(nc * ho * wo, real(0));
  const auto xv = x.values();
  for (std::size_t p = 0; p < nc; ++p)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j)
        y[(p * ho + i / k) * wo + j / k] += xv[(p * h + i) * w + j] * inv;
  Tensor r = make_output("avg_pool2d",
                         Shape{x.shape()[0], x.shape()[1], ho, wo}, std::move(y));
  if (should_record({&x})) {
    Node* xn = x.node();
    Node* on = r.node();
    record("avg_pool2d", {x}, r, [=]() {
      auto& g = xn->grad_buffer();
      for (std::size_t p = 0; p < nc; ++p)
        for (std::size_t i = 0; i < h; ++i)
          for (std::size_t j = 0; j < w; ++j)
            g[(p * h + i) * w + j] += on->grad[(p * ho + i / k) * wo + j / k] * inv;
    });
  }
  return r;
}

Tensor max_pool2d(const Tensor& x, std::size_t k) {
  check_pool("max_pool2d", x, k);
  const std::size_t nc = x.shape()[0] * x.shape()[1];
  const std::size_t h = x.shape()[2], w = x.shape()[3], ho = h / k, wo = w / k;
  std::vector<real> y(nc * ho * wo, -std::numeric_limits<real>::infinity());
  auto arg = std::make_shared<std::vector<std::size_t>>(y.size(), 0);
  const auto xv = x.values();
  for (std::size_t p = 0; p < nc; ++p)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        const std::size_t src = (p * h + i) * w + j;
        const std::size_t dst = (p * ho + i / k) * wo + j / k;
        if (xv[src] > y[dst]) {
          y[dst] = xv[src];
          (*arg)[dst] = src;
        }
      }
  Tensor r = make_output("max_pool2d",
                         Shape{x.shape()[0], x.shape()[1], ho, wo}, std::move(y));
  if (should_record({&x})) {
    Node* xn = x.node();
    Node* on = r.node();
    record("max_pool2d", {x}, r, [=]() {
      auto& g = xn->grad_buffer();
      for (std::size_t d = 0; d < arg->size(); ++d) g[(*arg)[d]] += on->grad[d];
    });
  }
  return r;
}

}  // namespace cfsnn::ad
