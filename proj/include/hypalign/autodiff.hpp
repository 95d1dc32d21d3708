#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hypalign/geometry.hpp"
#include "hypalign/graph.hpp"

namespace hypalign::ad {

using geometry::Curvature;
using geometry::Matrix;
using geometry::Vector;

class Tape;

// Handle to a node on a tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape over dense matrices. The forward pass records one node
// per operation; backward() walks the nodes in reverse and accumulates
// vector-Jacobian products into every node reachable from a parameter.
//
// Forward values are computed by the same geometry kernels the inference path
// uses, so a tape forward is bit-identical to model::forward_channel.
//
// The tape also folds the activation pattern of every non-smooth operation
// (relu masks, L1 signs, hinge activity, ball projections) into a signature
// hash; finite-difference checks compare signatures to detect evaluations
// that straddle a kink.
class Tape {
 public:
  Var constant(Matrix value, std::string name = "const");
  Var parameter(Matrix value, std::string name);

  Var matmul(Var a, Var b);
  Var spmm(const graph::SparseMatrix& lhs, Var x);  // constant sparse lhs
  Var relu(Var x);
  Var exp_map_rows(Var x, Curvature c);
  Var log_map_rows(Var x, Curvature c);
  Var gather_rows(Var x, std::vector<int> rows);

  // row-wise d(a_i, b_i) = || (-a_i) (+) b_i ||_1, result is a column vector
  Var mobius_distance_rows(Var a, Var b, Curvature c);

  // sum_j max(0, d_pos[pos_of_neg[j]] + margin - d_neg[j]); scalar output.
  // Subgradient at an exactly-zero hinge argument is 0.
  Var hinge_rank_loss(Var d_pos, Var d_neg, std::vector<int> pos_of_neg, double margin);

  // sum of all entries, 1x1 output
  Var sum(Var x);

  const Matrix& value(Var v) const;
  const Matrix& grad(Var v) const;
  const std::string& name(Var v) const;
  bool requires_grad(Var v) const;

  // seeds d(root)/d(root) = 1 and accumulates gradients; root must be 1x1
  void backward(Var root);

  // every registered parameter, in registration order
  const std::vector<Var>& parameters() const { return parameters_; }

  uint64_t activation_signature() const { return signature_; }

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::string name;
    bool requires_grad = false;
    std::function<void(Tape&)> backprop;
  };

  Var push(Matrix value, std::string name, bool requires_grad,
           std::function<void(Tape&)> backprop);
  Node& node(Var v);
  const Node& node(Var v) const;
  void fold_signature(uint64_t bits);

  std::vector<Node> nodes_;
  std::vector<Var> parameters_;
  uint64_t signature_ = 1469598103934665603ull;  // FNV-1a offset basis
};

}  // namespace hypalign::ad
