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
#include "augcondd/autograd.h"

#include <sstream>

#include "augcondd/errors.h"
#include "augcondd/random.h"

namespace augcondd {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) {
    throw InvalidInputError("tensor data size " + std::to_string(data_.size()) +
                            " does not match shape " + shape_string(shape_));
  }
}

std::string rng_state(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

void set_rng_state(Rng& rng, const std::string& state) {
  std::istringstream is(state);
  is >> rng;
  if (!is) throw IoError("malformed rng state");
}

namespace nn {

Var Tape::push(Tensor value, bool requires_grad, BackwardFn backward) {
  nodes_.push_back(Node{std::move(value), Tensor(), requires_grad,
                        std::move(backward)});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor* Tape::accumulate(int id) {
  Node& node = nodes_[id];
  if (!node.requires_grad) return nullptr;
  if (node.grad.empty() && !node.value.empty()) {
    node.grad = Tensor(node.value.shape(), 0.0);
  }
  return &node.grad;
}

void Tape::zero_grad() {
  for (Node& node : nodes_) node.grad = Tensor();
}

void Tape::backward(const Var& root) {
  if (root.tape() != this) throw InvalidInputError("backward on foreign var");
  if (root.value().size() != 1) {
    throw InvalidInputError("backward root must be a scalar, got " +
                            shape_string(root.shape()));
  }
  zero_grad();
  Node& top = nodes_[root.id()];
  if (!top.requires_grad) return;
  top.grad = Tensor(top.value.shape(), 1.0);
  for (int i = root.id(); i >= 0; --i) {
    Node& node = nodes_[i];
    if (node.grad.empty() || !node.backward) continue;
    node.backward();
  }
}

}  // namespace nn
}  // namespace augcondd
