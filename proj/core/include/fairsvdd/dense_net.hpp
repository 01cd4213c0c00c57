#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "fairsvdd/rng.hpp"

namespace fairsvdd {

enum class Activation { relu, identity };

const char* activation_name(Activation act);
Activation activation_from_name(const std::string& name);

// One affine layer, optionally followed by affine-free batch normalization
// before the activation. `weight` is fan_out x fan_in; `bias` is empty when
// the owning net has use_bias = false. Batch normalization carries no learned
// parameters (no scale, no shift — a learned shift would reopen the constant-
// map collapse the bias-free design rules out); it only keeps running
// statistics for inference-time use.
struct DenseLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
  Activation act = Activation::identity;
  bool batch_norm = false;
  Eigen::VectorXd running_mean;  // sized fan_out when batch_norm
  Eigen::VectorXd running_var;
};

// Fixed stack of dense layers. Both the encoder and the discriminator are
// DenseNets; batches are row-major (one instance per row).
struct DenseNet {
  std::vector<DenseLayer> layers;
  bool use_bias = false;

  Eigen::Index input_dim() const { return layers.empty() ? 0 : layers.front().weight.cols(); }
  Eigen::Index output_dim() const { return layers.empty() ? 0 : layers.back().weight.rows(); }
  std::size_t parameter_count() const;

  // Checks dimension chaining, finiteness, and the use_bias invariant.
  void validate() const;  // throws DataError
};

// Builds a net with layer widths `widths` on top of `input_dim`. All layers
// use `hidden_act` except the last, which uses `final_act`. Weights (and
// biases, when enabled) are drawn uniformly from [-1/sqrt(fan_in), +1/sqrt(fan_in)].
// With batch_norm, every layer normalizes its pre-activations.
DenseNet make_dense_net(Eigen::Index input_dim, const std::vector<int>& widths, bool use_bias,
                        Activation hidden_act, Activation final_act, std::uint64_t seed,
                        bool batch_norm = false);

// Cached activations from one forward pass; required by backward().
struct ForwardTape {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> act_input;  // per layer, what the activation consumed
  std::vector<Eigen::MatrixXd> post_act;   // per layer, after activation
  std::vector<Eigen::VectorXd> bn_scale;   // per layer, 1/sqrt(var+eps); empty if no bn
  bool batch_stats = false;  // whether bn used this batch's statistics
};

// Which statistics batch normalization uses.
enum class BnMode {
  eval,  // running statistics (inference)
  batch  // this batch's statistics, without touching the running ones
};

// batch is [b x input_dim]; returns [b x output_dim]. Pass a tape to enable a
// later backward() call; forward never mutates the net.
Eigen::MatrixXd forward(const DenseNet& net, const Eigen::MatrixXd& batch,
                        ForwardTape* tape = nullptr, BnMode mode = BnMode::eval);

// Training-mode forward: batch statistics, and the running statistics are
// folded toward them (momentum 0.1). Only the update paths in the training
// loop call this.
Eigen::MatrixXd forward_train(DenseNet& net, const Eigen::MatrixXd& batch,
                              ForwardTape* tape = nullptr);

// Parameter gradients shaped like the net.
struct Gradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;

  static Gradients zeros_like(const DenseNet& net);
  void add_scaled(const Gradients& other, double factor);
};

struct BackwardResult {
  Gradients grads;
  Eigen::MatrixXd input_grad;  // [b x input_dim]
};

// Exact reverse-mode gradients of sum_over_batch(<output, output_grad>) with
// respect to every parameter and to the input. The relu subgradient at 0 is 0.
// Throws DataError if the tape does not match the net.
BackwardResult backward(const DenseNet& net, const ForwardTape& tape,
                        const Eigen::MatrixXd& output_grad);

// (alpha/2) * sum of squared weight-matrix entries. Biases are excluded.
double weight_decay_term(const DenseNet& net, double alpha);

// Adds the decay gradient alpha * W to each weight gradient.
void add_weight_decay_gradient(const DenseNet& net, double alpha, Gradients& grads);

// Bias-corrected Adam with per-parameter moment buffers.
struct AdamState {
  std::vector<Eigen::MatrixXd> m_weight, v_weight;
  std::vector<Eigen::VectorXd> m_bias, v_bias;
  long step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState init(const DenseNet& net, double learning_rate);
};

// One Adam update of `net` in place; increments state.step. Shapes must match.
void adam_step(DenseNet& net, const Gradients& grads, AdamState& state);

// Central finite differences of `loss` over every parameter of `net`. The net
// is restored bit-exactly afterwards. Used as the independent gradient oracle.
Gradients finite_difference_gradients(DenseNet& net, const std::function<double()>& loss,
                                      double step_size);

// max over parameters of |a - b| / max(|a|, |b|, floor)
double max_relative_error(const Gradients& a, const Gradients& b, double floor);

// FNV-1a over the raw parameter bytes; used by freeze assertions in training.
std::uint64_t parameter_hash(const DenseNet& net);

}  // namespace fairsvdd
