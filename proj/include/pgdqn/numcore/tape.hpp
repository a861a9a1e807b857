#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "pgdqn/numcore/tensor.hpp"

namespace pgdqn {

// Reverse-mode tape over vector-valued nodes. Build a forward graph, call
// backward() once on a scalar node, then read per-parameter gradients.
// A tape is single-use: backward() consumes it.
class Tape {
 public:
  using Var = int;

  Var input(std::span<const double> v);       // constant leaf
  Var param(Tensor& t);                       // trainable leaf, deduplicated by address

  Var affine(Var w, Var b, Var x);            // W x + b, W rank-2 param
  Var noisy_affine(Var w_mu, Var w_sigma, Var b_mu, Var b_sigma, Var x,
                   std::span<const double> f_out, std::span<const double> f_in);
  Var relu(Var x);
  Var softmax(Var x);
  Var log_softmax(Var x);
  Var pick(Var x, int index);                 // width-1
  Var dot(Var a, Var b);                      // width-1
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var x, double c);
  Var mean(Var x);                            // width-1
  Var add_scalar(Var x, Var s);               // broadcast width-1 s over x

  std::span<const double> value(Var v) const;
  double scalar(Var v) const;

  void backward(Var loss);                    // loss must be width-1
  bool consumed() const { return consumed_; }

  // Gradient for a parameter tensor; exact zeros when the parameter never
  // reached the loss (or was never placed on this tape).
  Tensor grad(const Tensor& param) const;

 private:
  enum class Op {
    Input, Param, Affine, NoisyAffine, Relu, Softmax, LogSoftmax,
    Pick, Dot, Add, Sub, Scale, Mean, AddScalar,
  };

  struct Node {
    Op op;
    int in[5] = {-1, -1, -1, -1, -1};
    int index = 0;
    double c = 0.0;
    std::vector<double> val;   // unused for Param (reads the tensor directly)
    std::vector<double> adj;
    Tensor* bound = nullptr;   // Param only
    std::vector<double> aux;   // NoisyAffine: f_out ++ f_in
    int aux_split = 0;
  };

  std::span<const double> node_value(const Node& n) const;
  Var push(Node n);
  const Node& at(Var v) const { return nodes_[static_cast<std::size_t>(v)]; }
  Node& at(Var v) { return nodes_[static_cast<std::size_t>(v)]; }

  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, Var> params_;
  bool consumed_ = false;
};

}  // namespace pgdqn
