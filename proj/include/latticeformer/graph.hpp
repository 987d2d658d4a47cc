#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "latticeformer/tensor.hpp"

namespace latticeformer {

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  // Frozen parameters enter graphs as constants and never receive gradient.
  bool frozen = false;
};

// Owns named parameters. Addresses are stable for the store's lifetime, so
// model components keep raw pointers into it.
template <typename T>
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  Parameter<T>& add(std::string name, std::vector<std::size_t> shape) {
    if (find(name) != nullptr) throw std::invalid_argument("duplicate parameter " + name);
    Parameter<T>& p = params_.emplace_back();
    p.name = std::move(name);
    p.value = Tensor<T>(shape);
    p.grad = Tensor<T>(std::move(shape));
    return p;
  }

  Parameter<T>* find(std::string_view name) {
    for (auto& p : params_) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }
  const Parameter<T>* find(std::string_view name) const {
    for (const auto& p : params_) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }
  Parameter<T>& at(std::string_view name) {
    Parameter<T>* p = find(name);
    if (p == nullptr) throw std::out_of_range("no parameter " + std::string(name));
    return *p;
  }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  std::size_t size() const noexcept { return params_.size(); }

  std::size_t scalar_count() const noexcept {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p.grad.fill(T(0));
  }

 private:
  std::deque<Parameter<T>> params_;
};

template <typename T>
class Graph;

// Handle to a node of a Graph.
template <typename T>
struct Var {
  Graph<T>* graph = nullptr;
  std::size_t id = 0;

  const Tensor<T>& value() const { return graph->value(*this); }
};

// Reverse-mode tape. Nodes are appended in evaluation order, so replaying
// them backwards is a valid topological order. A graph is single-use and
// confined to one thread.
template <typename T>
class Graph {
 public:
  using Backward = std::function<void(Graph&, std::size_t)>;

  Graph() = default;
  // Enables dropout, drawing masks from `rng`.
  explicit Graph(std::mt19937_64& rng) : rng_(&rng) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var<T> constant(Tensor<T> value) { return push(std::move(value), false, nullptr, nullptr); }

  Var<T> parameter(Parameter<T>& p) {
    if (p.frozen) return constant(p.value);
    return push(p.value, true, &p, nullptr);
  }

  // Records an op result. The node requires grad if any input does; the
  // backward closure receives the graph and the node's own id.
  Var<T> record(Tensor<T> value, std::initializer_list<Var<T>> inputs, Backward backward) {
    bool needs = false;
    for (const Var<T>& in : inputs) needs = needs || nodes_[in.id].requires_grad;
    return push(std::move(value), needs, nullptr, needs ? std::move(backward) : nullptr);
  }
  Var<T> record(Tensor<T> value, std::span<const Var<T>> inputs, Backward backward) {
    bool needs = false;
    for (const Var<T>& in : inputs) needs = needs || nodes_[in.id].requires_grad;
    return push(std::move(value), needs, nullptr, needs ? std::move(backward) : nullptr);
  }

  const Tensor<T>& value(Var<T> v) const { return nodes_[v.id].value; }
  const Tensor<T>& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(Var<T> v) const { return nodes_[v.id].requires_grad; }

  // Gradient accumulator of `v`, allocated on first use; nullptr when `v`
  // does not require grad.
  Tensor<T>* grad_of(Var<T> v) { return grad_of(v.id); }
  Tensor<T>* grad_of(std::size_t id) {
    Node& node = nodes_[id];
    if (!node.requires_grad) return nullptr;
    if (node.grad.empty() && !node.value.empty()) node.grad = Tensor<T>(node.value.shape());
    return &node.grad;
  }
  const Tensor<T>& upstream(std::size_t id) const { return nodes_[id].grad; }

  // Seeds d(loss)/d(loss) = 1 and accumulates into Parameter::grad.
  void backward(Var<T> loss) {
    if (nodes_[loss.id].value.size() != 1) throw std::logic_error("backward() needs a scalar loss");
    Tensor<T>* seed = grad_of(loss);
    if (seed == nullptr) return;
    (*seed)[0] += T(1);
    for (std::size_t id = loss.id + 1; id-- > 0;) {
      Node& node = nodes_[id];
      if (!node.requires_grad || node.grad.empty()) continue;
      if (node.backward) node.backward(*this, id);
      if (node.param != nullptr) {
        auto& pg = node.param->grad;
        for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += node.grad[k];
      }
    }
  }

  bool training() const noexcept { return rng_ != nullptr; }
  std::mt19937_64& rng() { return *rng_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    Parameter<T>* param = nullptr;
    Backward backward;
  };

  Var<T> push(Tensor<T> value, bool requires_grad, Parameter<T>* param, Backward backward) {
    nodes_.push_back({std::move(value), {}, requires_grad, param, std::move(backward)});
    return Var<T>{this, nodes_.size() - 1};
  }

  // A deque keeps value references valid while later nodes are appended.
  std::deque<Node> nodes_;
  std::mt19937_64* rng_ = nullptr;
};

}  // namespace latticeformer
