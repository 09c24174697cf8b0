#pragma once

#include <functional>
#include <vector>

#include "shapelab/rng.hpp"
#include "shapelab/tensor.hpp"

namespace shapelab {

// Handle to a node on a gradient tape.
struct Val {
  int id = -1;
};

enum class Padding { kValid, kSame };

// Reverse-mode gradient tape over Tensor-valued operations.
//
// Operations append nodes; backward() runs the recorded closures in
// reverse creation order (creation order is already topological).
// Gradients for leaf() nodes accumulate into the tensor's own gradient
// buffer when one was allocated with set_requires_grad(true), which is
// how model parameters receive their gradients. A tape instance is
// single-threaded; independent tapes are fully independent.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf node aliasing `t`'s storage (and gradient buffer, if any).
  Val leaf(const Tensor& t);

  Val matmul(Val a, Val b);
  // [m x n] plus a length-n row vector broadcast over rows.
  Val add_rows(Val x, Val bias);
  Val add(Val a, Val b);
  Val mul(Val a, Val b);
  Val scale(Val a, double c);
  Val sum(Val a);
  Val relu(Val a);
  // Cross-correlation (no kernel flip), stride 1, plus per-channel bias.
  Val conv2d(Val input, Val kernels, Val bias, Padding padding);
  Val maxpool2d(Val input, int window, int stride);
  Val reshape(Val a, std::vector<int> shape);
  // Inverted dropout: zero with probability `rate`, scale survivors by
  // 1/(1-rate) in training mode; identity in evaluation mode.
  Val dropout(Val a, double rate, Rng& rng, bool training);
  // Mean over rows of -log softmax(logits)[label]. Scalar.
  Val softmax_nll(Val logits, const std::vector<int>& labels);
  // coefficient * sum of squared entries over all params. Scalar.
  Val l2_penalty(const std::vector<Val>& params, double coefficient);
  // Stack length-n vectors into an [m x n] matrix.
  Val stack_rows(const std::vector<Val>& rows);

  const Tensor& value(Val v) const;
  double scalar_value(Val v) const;

  // Gradient buffer of a node after backward(); nullptr when the node
  // needed no gradient. For leaves this is the tensor's own buffer.
  const double* grad_data(Val v) const;

  // Seeds d(out)/d(out) = 1 and propagates. `out` must be scalar. Leaf
  // tensor gradients accumulate (callers zero them between steps);
  // interior node gradients are fresh per call.
  void backward(Val out);

  int node_count() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;  // interior nodes only; leaves use value.grad()
    std::vector<int> parents;
    std::function<void(Tape&, int)> back;  // null for leaves
    bool is_leaf = false;
    bool needs_grad = false;
    bool reachable = false;  // scratch for backward()
  };

  int add_node(Tensor value, std::vector<int> parents, std::function<void(Tape&, int)> back);
  double* grad_ptr(int id);
  Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  void check_id(Val v) const;

  std::vector<Node> nodes_;
};

// Row-wise softmax with max-subtraction, forward only.
Tensor softmax_rows(const Tensor& logits);

}  // namespace shapelab
