// Copyright 2026 The AugCondD Authors
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
#ifndef AUGCONDD_AUTOGRAD_H_
#define AUGCONDD_AUTOGRAD_H_

#include <deque>
#include <functional>
#include <vector>

#include "augcondd/tensor.h"

namespace augcondd::nn {

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid as long as the
// tape it came from.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  // Gradient accumulated by the last Tape::backward; empty if this node was
  // not reached.
  const Tensor& grad() const;
  bool requires_grad() const;
  // Scalar value of a one-element node.
  double item() const { return value()[0]; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape. Nodes are appended in evaluation order, so a reverse
// sweep visits every node after all of its consumers.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value) { return push(std::move(value), false, {}); }
  Var leaf(Tensor value, bool requires_grad = true) {
    return push(std::move(value), requires_grad, {});
  }
  // Records an op output. The backward closure reads grad(result) and
  // accumulates into its inputs via accumulate().
  Var record(Tensor value, bool requires_grad, BackwardFn backward) {
    return push(std::move(value), requires_grad, std::move(backward));
  }

  const Tensor& value(int id) const { return nodes_[id].value; }
  const Tensor& grad(int id) const { return nodes_[id].grad; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }

  // Gradient buffer of a node that needs one, zero-allocated on first use;
  // nullptr for nodes that do not require gradients.
  Tensor* accumulate(int id);

  // Seeds d(root)/d(root) = 1 and sweeps backwards. Gradients of previous
  // sweeps are cleared first.
  void backward(const Var& root);
  void zero_grad();

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(Tensor value, bool requires_grad, BackwardFn backward);

  std::deque<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }
inline const Tensor& Var::grad() const { return tape_->grad(id_); }
inline bool Var::requires_grad() const { return tape_->requires_grad(id_); }

}  // namespace augcondd::nn

#endif  // AUGCONDD_AUTOGRAD_H_
