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

// Dense tensors and the reverse-mode tape they are recorded on.
//
// A Tensor is a cheap handle onto a shared node holding values and,
// once backward reaches it, a gradient buffer of the same shape. Ops record
// an entry on the thread's active Tape whenever one of their operands
// requires a gradient; the entry captures the operand nodes and a closure
// that pushes the output gradient back into them. Gradients accumulate
// additively across fan-out, so callers zero leaf gradients between steps.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfsnn/core/types.hpp"

namespace cfsnn::ad {

class Tape;

struct Node {
  Shape shape;
  std::vector<real> value;
  std::vector<real> grad;  // empty until first written
  bool requires_grad = false;
  // Tape entry that produced this node (index + 1), 0 for leaves.
  std::size_t producer = 0;
  std::uint64_t tape_generation = 0;

  // Allocates a zero gradient buffer if none exists; returns it.
  std::vector<real>& grad_buffer();
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor full(const Shape& shape, real v, bool requires_grad = false);
  static Tensor from(const Shape& shape, std::vector<real> values,
                     bool requires_grad = false);
  static Tensor scalar(real v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t numel() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }

  std::span<const real> values() const { return node_->value; }
  std::span<real> mutable_values() { return node_->value; }
  // Empty when backward never reached this tensor.
  std::span<const real> grad() const { return node_->grad; }
  std::span<real> mutable_grad() { return node_->grad_buffer(); }
  void zero_grad();

  real item() const;
  real at(std::size_t flat) const { return node_->value[flat]; }

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

  // New leaf with copied values and no history.
  Tensor detach() const;

 private:
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}
  friend Tensor wrap(std::shared_ptr<Node>);
  std::shared_ptr<Node> node_;
};

Tensor wrap(std::shared_ptr<Node> n);

// Ordered record of differentiable operations for one forward pass.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  struct Entry {
    const char* op;
    std::vector<std::shared_ptr<Node>> inputs;
    std::shared_ptr<Node> output;
    BackwardFn backward;
  };

  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Appends an entry. Recording onto a consumed tape starts a new forward.
  void record(const char* op, std::vector<std::shared_ptr<Node>> inputs,
              std::shared_ptr<Node> output, BackwardFn fn);

  // Propagates d(loss)/d(node) to every reachable node. Throws on a
  // non-scalar loss, a loss not recorded here, or a second call.
  void backward(const Tensor& loss);

  void clear();
  std::size_t size() const { return entries_.size(); }
  bool consumed() const { return consumed_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::uint64_t generation() const { return generation_; }

  // Checks that every operand was produced by an earlier entry or is a leaf.
  bool topologically_ordered() const;

  static Tape* active();

 private:
  friend class TapeScope;
  std::vector<Entry> entries_;
  bool consumed_ = false;
  std::uint64_t generation_;
};

// Makes a tape the thread's active tape for the scope's lifetime.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// Suspends recording on this thread.
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape* previous_;
};

// Runs backward on the tape that recorded `loss`.
void backward(const Tensor& loss);

// --- Extension surface for fused ops defined outside this library part ---

// True when an op over these operands must be recorded.
bool should_record(std::initializer_list<const Tensor*> inputs);
bool should_record(std::span<const Tensor> inputs);

// Wraps freshly computed values as an op output. Throws NumericError naming
// `op` if any value is non-finite.
Tensor make_output(const char* op, const Shape& shape, std::vector<real> values);

// Records `fn` for `output` on the active tape and marks it as requiring
// a gradient.
void record(const char* op, std::span<const Tensor> inputs, Tensor& output,
            Tape::BackwardFn fn);
void record(const char* op, std::initializer_list<Tensor> inputs,
            Tensor& output, Tape::BackwardFn fn);

// Adds `g` into the node's gradient if it requires one.
void accumulate(Node* n, std::span<const real> g);

namespace debug {
// Multiplies the upstream gradient seen by every backward rule of `op` by
// `factor`. Used to confirm that gradient checks catch broken rules.
void set_backward_fault(std::string op, real factor);
void clear_backward_fault();
}  // namespace debug

struct Parameter {
  std::string name;
  Tensor tensor;
  std::vector<real> momentum;
  bool weight_decay = true;
  bool is_tsg = false;

  Parameter() = default;
  Parameter(std::string n, Tensor t, bool decay = true);
};

}  // namespace cfsnn::ad
