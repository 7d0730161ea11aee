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

#include "cfsnn/autodiff/tensor.hpp"

#include <atomic>
#include <cmath>

#include "cfsnn/kernels/kernels.hpp"

namespace cfsnn::ad {
namespace {

thread_local Tape* t_active = nullptr;

std::atomic<std::uint64_t> g_generation{1};

struct Fault {
  std::string op;
  real factor;
};
std::optional<Fault>& fault() {
  static std::optional<Fault> f;
  return f;
}

}  // namespace

std::vector<real>& Node::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), real(0));
  return grad;
}

Tensor wrap(std::shared_ptr<Node> n) { return Tensor(std::move(n)); }

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
  return full(shape, real(0), requires_grad);
}

Tensor Tensor::full(const Shape& shape, real v, bool requires_grad) {
  return from(shape, std::vector<real>(shape.numel(), v), requires_grad);
}

Tensor Tensor::from(const Shape& shape, std::vector<real> values,
                    bool requires_grad) {
  if (values.size() != shape.numel())
    throw ShapeError("shape " + shape.str() + " holds " +
                     std::to_string(shape.numel()) + " values, got " +
                     std::to_string(values.size()));
  auto n = std::make_shared<Node>();
  n->shape = shape;
  n->value = std::move(values);
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(real v, bool requires_grad) {
  return from(Shape{}, {v}, requires_grad);
}

void Tensor::zero_grad() {
  if (!node_->grad.empty())
    std::fill(node_->grad.begin(), node_->grad.end(), real(0));
}

real Tensor::item() const {
  if (numel() != 1)
    throw ShapeError("item() on tensor of shape " + shape().str());
  return node_->value[0];
}

Tensor Tensor::detach() const {
  return from(shape(), node_->value, false);
}

Tape::Tape() : generation_(g_generation.fetch_add(1)) {}

void Tape::clear() {
  entries_.clear();
  consumed_ = false;
  generation_ = g_generation.fetch_add(1);
}

void Tape::record(const char* op, std::vector<std::shared_ptr<Node>> inputs,
                  std::shared_ptr<Node> output, BackwardFn fn) {
  if (consumed_) clear();
  output->producer = entries_.size() + 1;
  output->tape_generation = generation_;
  entries_.push_back({op, std::move(inputs), std::move(output), std::move(fn)});
}

bool Tape::topologically_ordered() const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    for (const auto& in : entries_[i].inputs) {
      const bool produced_here = in->producer != 0 &&
                                 in->tape_generation == generation_;
      if (produced_here && in->producer - 1 >= i) return false;
    }
  }
  return true;
}

void Tape::backward(const Tensor& loss) {
  if (consumed_)
    throw StateError(
        "backward called twice on the same forward pass; run a new forward "
        "before calling backward again");
  if (loss.numel() != 1)
    throw ShapeError("backward requires a scalar loss, got shape " +
                     loss.shape().str());
  Node* ln = loss.node();
  consumed_ = true;
  if (ln->producer == 0 || ln->tape_generation != generation_) {
    // A leaf loss: d loss / d loss = 1.
    if (ln->requires_grad) ln->grad_buffer()[0] += real(1);
    return;
  }
  ln->grad_buffer()[0] += real(1);
  const auto& f = fault();
  for (std::size_t i = ln->producer; i-- > 0;) {
    Entry& e = entries_[i];
    if (e.output->grad.empty()) continue;
    if (f && f->op == e.op) {
      auto& g = e.output->grad;
      std::vector<real> saved = g;
      for (auto& x : g) x *= f->factor;
      e.backward();
      g = std::move(saved);
    } else {
      e.backward();
    }
  }
}

Tape* Tape::active() { return t_active; }

TapeScope::TapeScope(Tape& tape) : previous_(t_active) { t_active = &tape; }
TapeScope::~TapeScope() { t_active = previous_; }

NoGradScope::NoGradScope() : previous_(t_active) { t_active = nullptr; }
NoGradScope::~NoGradScope() { t_active = previous_; }

void backward(const Tensor& loss) {
  if (Tape* t = Tape::active()) {
    t->backward(loss);
    return;
  }
  throw StateError("backward called with no active tape");
}

bool should_record(std::initializer_list<const Tensor*> inputs) {
  if (!t_active) return false;
  for (const Tensor* t : inputs)
    if (t && t->defined() && t->requires_grad()) return true;
  return false;
}

bool should_record(std::span<const Tensor> inputs) {
  if (!t_active) return false;
  for (const Tensor& t : inputs)
    if (t.defined() && t.requires_grad()) return true;
  return false;
}

Tensor make_output(const char* op, const Shape& shape,
                   std::vector<real> values) {
  if (!kernels::active().all_finite(values.size(), values.data())) {
    std::size_t idx = 0;
    while (idx < values.size() && std::isfinite(values[idx])) ++idx;
    throw NumericError(std::string("non-finite value in output of ") + op +
                       " at element " + std::to_string(idx));
  }
  return Tensor::from(shape, std::move(values));
}

void record(const char* op, std::span<const Tensor> inputs, Tensor& output,
            Tape::BackwardFn fn) {
  Tape* t = t_active;
  if (!t) return;
  std::vector<std::shared_ptr<Node>> nodes;
  nodes.reserve(inputs.size());
  for (const Tensor& in : inputs)
    if (in.defined()) nodes.push_back(in.node_ptr());
  output.set_requires_grad(true);
  t->record(op, std::move(nodes), output.node_ptr(), std::move(fn));
}

void record(const char* op, std::initializer_list<Tensor> inputs,
            Tensor& output, Tape::BackwardFn fn) {
  record(op, std::span<const Tensor>(inputs.begin(), inputs.size()), output,
         std::move(fn));
}

void accumulate(Node* n, std::span<const real> g) {
  if (!n->requires_grad) return;
  auto& buf = n->grad_buffer();
  kernels::active().add(buf.size(), buf.data(), g.data(), buf.data());
}

namespace debug {
void set_backward_fault(std::string op, real factor) {
  fault() = Fault{std::move(op), factor};
}
void clear_backward_fault() { fault().reset(); }
}  // namespace debug

Parameter::Parameter(std::string n, Tensor t, bool decay)
    : name(std::move(n)),
      tensor(std::move(t)),
      momentum(tensor.numel(), real(0)),
      weight_decay(decay) {
  tensor.set_requires_grad(true);
}

}  // namespace cfsnn::ad
