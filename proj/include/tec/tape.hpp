// Copyright (c) the TerraCodec Authors.
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

#ifndef TEC_TAPE_HPP_
#define TEC_TAPE_HPP_

#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tec/tensor.hpp"

namespace tec {

// Handle into a Tape. Only valid for the tape that created it.
template <typename S>
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Define-by-run reverse-mode tape. Each op appends a node holding its value
// and a closure that routes the node's gradient to its inputs. backward()
// walks nodes in reverse creation order, which is a valid topological order
// by construction.
template <typename S>
class Tape {
 public:
  struct Node {
    Tensor<S> value;
    Tensor<S> grad;  // empty until something flows into it
    std::function<void(Tape&, const Tensor<S>&)> backward;
    bool requires_grad = false;
  };

  Var<S> leaf(Tensor<S> value, bool requires_grad) {
    nodes_.push_back(Node{std::move(value), {}, nullptr, requires_grad});
    return Var<S>{int(nodes_.size()) - 1};
  }

  Var<S> make(Tensor<S> value, bool requires_grad,
              std::function<void(Tape&, const Tensor<S>&)> back) {
    nodes_.push_back(Node{std::move(value), {}, std::move(back), requires_grad});
    return Var<S>{int(nodes_.size()) - 1};
  }

  const Tensor<S>& val(Var<S> v) const { return nodes_[size_t(v.id)].value; }
  const Tensor<S>& grad(Var<S> v) const { return nodes_[size_t(v.id)].grad; }
  bool requires_grad(Var<S> v) const { return nodes_[size_t(v.id)].requires_grad; }

  // Accumulate a gradient contribution, allocating on first touch. No-op for
  // nodes that do not require gradients, so ops can route unconditionally.
  void accum(Var<S> v, Tensor<S>&& g) {
    Node& n = nodes_[size_t(v.id)];
    if (!n.requires_grad) return;
    if (n.grad.empty())
      n.grad = std::move(g);
    else
      n.grad.array() += g.array();
  }
  void accum(Var<S> v, const Tensor<S>& g) {
    Node& n = nodes_[size_t(v.id)];
    if (!n.requires_grad) return;
    if (n.grad.empty())
      n.grad = g;
    else
      n.grad.array() += g.array();
  }

  // Seeds d(root)/d(root) = 1 and runs the chain rule backwards. root must
  // be a scalar.
  void backward(Var<S> root) {
    TEC_CHECK(val(root).size() == 1, "backward root must be scalar");
    nodes_[size_t(root.id)].grad = Tensor<S>::scalar(S(1));
    for (int i = root.id; i >= 0; --i) {
      Node& n = nodes_[size_t(i)];
      if (n.backward && n.requires_grad && !n.grad.empty()) n.backward(*this, n.grad);
    }
  }

  size_t node_count() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;
};

// Named trainable tensors plus their optimizer slots. Entry order is the
// serialization order, so creation must be deterministic.
template <typename S>
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor<S> value;
    Tensor<S> adam_m, adam_v;  // sized on first optimizer step
    int group = 0;             // 0: main, 1: density (separate learning rate)
  };

  int add(const std::string& name, Tensor<S> init, int group = 0) {
    TEC_CHECK(!index_.count(name), "duplicate parameter: " + name);
    index_[name] = int(entries_.size());
    entries_.push_back(Entry{name, std::move(init), {}, {}, group});
    return int(entries_.size()) - 1;
  }

  bool has(const std::string& name) const { return index_.count(name) != 0; }
  int id(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) fail_invariant("unknown parameter: " + name);
    return it->second;
  }
  Tensor<S>& value(const std::string& name) { return entries_[size_t(id(name))].value; }
  const Tensor<S>& value(const std::string& name) const {
    return entries_[size_t(id(name))].value;
  }
  Entry& entry(int i) { return entries_[size_t(i)]; }
  const Entry& entry(int i) const { return entries_[size_t(i)]; }
  int count() const { return int(entries_.size()); }

  Eigen::Index total_size() const {
    Eigen::Index n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, int> index_;
};

// Per-step bridge between a ParamStore and a Tape: parameters become leaf
// nodes on first use; after backward() the gradients are read back out by
// store index.
template <typename S>
class Binding {
 public:
  Binding(Tape<S>& tape, ParamStore<S>& ps)
      : tape_(&tape), ps_(&ps), node_(size_t(ps.count()), -1) {}

  Var<S> operator()(const std::string& name) {
    const int i = ps_->id(name);
    if (node_[size_t(i)] < 0) node_[size_t(i)] = tape_->leaf(ps_->entry(i).value, true).id;
    return Var<S>{node_[size_t(i)]};
  }

  bool bound(int entry) const { return node_[size_t(entry)] >= 0; }

  // Gradient of a bound entry; empty tensor if the entry never joined the
  // graph or received no gradient.
  Tensor<S> grad(int entry) const {
    if (node_[size_t(entry)] < 0) return {};
    return tape_->grad(Var<S>{node_[size_t(entry)]});
  }

 private:
  Tape<S>* tape_;
  ParamStore<S>* ps_;
  std::vector<int> node_;
};

}  // namespace tec

#endif  // TEC_TAPE_HPP_
