#pragma once

// Minimal reverse-mode automatic differentiation over dense matrices.
//
// A Tape owns every node created during one forward pass. Nodes are appended
// in creation order, which is already a topological order, so backward() is a
// single reverse sweep over the node list. Var is a cheap handle (tape, id).
//
// Only the operations the training objective needs are provided. Shapes must
// match exactly; there is no broadcasting.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "derwent/matrix.hpp"

namespace derwent::ad {

// Lower bound applied to log() arguments.
inline constexpr double kLogClamp = 1e-12;
// cosine() rejects operands whose norm is at or below this.
inline constexpr double kNormFloor = 1e-8;

class Tape;

class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  const Matrix& grad() const;
  // Value of a 1x1 node.
  double item() const;
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  // Receives the node's own value and its accumulated gradient.
  using Backward = std::function<void(const Matrix& value, const Matrix& grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Trainable leaf; gradients accumulate across backward() calls.
  Var parameter(Matrix value);
  // Leaf that never receives a gradient.
  Var constant(Matrix value);

  // Appends an interior node. `backward` is dropped when no parent needs a
  // gradient.
  Var record(Matrix value, std::initializer_list<Var> parents, Backward backward);
  Var record(Matrix value, std::span<const Var> parents, Backward backward);

  // Seeds d(root)/d(root) = 1 and sweeps the tape in reverse. Interior
  // gradients are cleared first; leaf gradients accumulate.
  void backward(Var root);
  void zero_grad();

  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  const Matrix& value(Var v) const { return nodes_[v.id()].value; }
  const Matrix& grad(Var v) const { return nodes_[v.id()].grad; }
  // Mutable gradient of a node that requires one.
  Matrix& grad_mut(Var v) { return nodes_[v.id()].grad; }

  std::size_t size() const { return nodes_.size(); }
  // Nodes processed by the most recent backward().
  std::size_t last_backward_visits() const { return last_visits_; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    bool requires_grad = false;
    bool leaf = false;
  };

  Var push(Node node);
  void check_owned(Var v) const;

  std::vector<Node> nodes_;
  std::size_t last_visits_ = 0;
};

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var add_n(std::span<const Var> terms);
Var negate(Var a);
Var scale(Var a, double c);
Var tanh(Var a);
Var sigmoid(Var a);
// log(max(a, kLogClamp)); the gradient is zero where the clamp is active.
Var log(Var a);
// log(sigmoid(a)) without the intermediate rounding.
Var log_sigmoid(Var a);
// 1 / (1 + exp(-alpha * a)), elementwise.
Var scaled_sigmoid(Var a, double alpha);
// Sum of all entries as a 1x1 node.
Var sum(Var a);
// Cosine between two equally shaped operands, viewed as flat vectors.
Var cosine(Var a, Var b);
// Euclidean norm of a - b. The subgradient at a == b is zero.
Var l2_norm_diff(Var a, Var b);
// [a | b] for two row vectors.
Var concat(Var a, Var b);

}  // namespace derwent::ad
