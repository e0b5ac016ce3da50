#pragma once

#include <vector>

#include "gstbench/params.hpp"
#include "gstbench/tensor.hpp"

namespace gst {

struct Var {
  int i = -1;
  bool valid() const { return i >= 0; }
};

// Reverse-mode gradient tape over channels x height x width tensors.
// One tape records one forward pass on one logical thread; parameter
// gradients accumulate into tape-local buffers so independent tapes can run
// concurrently against a shared, read-only ParamStore and be merged in a
// fixed order afterwards.
//
// A tape constructed with record_grads=false evaluates the same graph
// without tracking anything; this is the detached path used for
// pseudo-outcome generation.
class Tape {
 public:
  explicit Tape(const ParamStore* params, bool record_grads = true);

  Var input(Tensor value);
  Var param(int pid);

  // Zero-padded same-shape cross-correlation; weight is (out_ch, in_ch, k*k),
  // bias (out_ch,1,1) or an invalid Var for none. ksize is 1 or 3.
  Var conv2d(Var x, Var weight, Var bias, int ksize);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  // gate has one channel; broadcasts across the channels of x.
  Var mul_gate(Var gate, Var x);
  Var sigmoid(Var x);
  Var tanh_(Var x);
  Var relu(Var x);
  Var concat_c(const std::vector<Var>& xs);
  Var slice_c(Var x, int from, int count);
  Var maxpool2(Var x);
  Var upsample2(Var x);

  // Scalar losses. mask/weights may be null (all ones); the loss divides by
  // the sum of mask*weights, which must be positive.
  Var masked_wmse(Var pred, const Tensor& target, const Tensor* mask,
                  const Tensor* weights);
  Var bce_logits(Var pred, const Tensor& labels, const Tensor* mask);
  Var sum_squares(Var x);

  const Tensor& value(Var v) const;

  // Seeds d(loss)/d(loss) = seed and propagates. Requires a scalar loss on a
  // recording tape with at least one forward node.
  void backward(Var loss, double seed = 1.0);

  // Gradient of the last backward() w.r.t. a parameter; zero-shaped tensor
  // if the parameter was never touched by this tape.
  const Tensor* param_grad(int pid) const;

  // Adds this tape's parameter gradients into the store's gradient slots.
  void merge_grads_into(ParamStore& store) const;

  // Smallest distance to a non-differentiable point seen during the forward
  // pass (relu inputs, maxpool win margins). Finite-difference checks screen
  // evaluations whose margin falls under their step size.
  double kink_margin() const { return kink_margin_; }

  bool recording() const { return record_grads_; }

 private:
  enum class Op {
    Input, Param, Conv2d, Add, Sub, Mul, MulGate, Sigmoid, Tanh, Relu,
    ConcatC, SliceC, MaxPool2, Upsample2, MaskedWMSE, BceLogits, SumSquares,
  };

  struct Node {
    Op op;
    int a = -1, b = -1, c = -1;
    int i0 = 0, i1 = 0;
    double x0 = 0.0;  // cached normalizer for loss nodes
    Tensor val;
    Tensor grad;
    std::vector<int> arg;  // concat inputs / pooling argmax
    Tensor aux0, aux1;     // loss target / effective weight
    int pid = -1;
    bool needs_grad = false;
  };

  Var push(Node n);
  Node& at(Var v);
  const Node& at(Var v) const;
  bool track(Var v) const { return v.valid() && nodes_[v.i].needs_grad; }
  Tensor& grad_of(Var v);

  const ParamStore* params_;
  bool record_grads_;
  std::vector<Node> nodes_;
  std::vector<Tensor> param_grads_;   // indexed by pid, empty if untouched
  std::vector<int> touched_params_;   // pids in first-use order
  double kink_margin_ = 1e300;
  bool ran_backward_ = false;
};

}  // namespace gst
