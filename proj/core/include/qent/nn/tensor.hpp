#pragma once

// Reverse-mode autodiff over dense row-major double tensors.
//
// A Tensor is a cheap handle to a graph node. Ops build new nodes that keep
// their parents alive and carry a backward closure; Tensor::backward() on a
// scalar runs those closures in reverse topological order and accumulates
// into the `grad` buffers of every node that requires a gradient.

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qent::nn {

using Shape = std::vector<int>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tensor {
 public:
  struct Node;

  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  int rank() const { return static_cast<int>(shape().size()); }
  int dim(int axis) const;
  std::size_t size() const;

  std::span<double> data();
  std::span<const double> data() const;
  // Empty unless requires_grad().
  std::span<double> grad();
  std::span<const double> grad() const;

  bool requires_grad() const;
  double item() const;

  // Seeds d(this)/d(this) = 1 on a one-element tensor and accumulates
  // gradients into every reachable node. Intermediate gradients are reset
  // first, so repeated calls add exactly one more pass to the leaves.
  void backward();
  void zero_grad();

  // Detached copy: same values, no graph, no gradient.
  Tensor detach() const;

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& shared_node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  friend Tensor make_result(Shape shape, std::initializer_list<const Tensor*> parents);

  std::shared_ptr<Node> node_;
};

struct Tensor::Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void()> backward_fn;
};

// New op output whose requires_grad is inherited from its parents (and is
// false while a NoGradGuard is alive on this thread).
Tensor make_result(Shape shape, std::initializer_list<const Tensor*> parents);

bool grad_enabled();

// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace qent::nn
