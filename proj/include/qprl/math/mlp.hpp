#pragma once

#include <Eigen/Core>
#include <vector>

#include "qprl/math/rng.hpp"

namespace qprl::math {

/// Dense feed-forward network: leaky-rectifier hidden layers, linear
/// output. Distribution heads (softmax, softplus) live in the policy
/// code, not here.
struct MlpParams {
  std::vector<Eigen::MatrixXd> weights;  // per layer, rows = out, cols = in
  std::vector<Eigen::VectorXd> biases;
  double weight_decay = 0.0;
  double leaky_slope = 0.01;

  int num_layers() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
  bool finite() const;
  void validate() const;  // throws on inconsistent layer chaining

  /// He-normal init for hidden layers, Glorot-normal for the output layer.
  static MlpParams make(const std::vector<int>& dims, Rng& rng,
                        double weight_decay = 0.0);
};

/// Forward-pass activations kept for backpropagation.
struct MlpTape {
  Eigen::VectorXd input;
  std::vector<Eigen::VectorXd> pre;   // pre-activation per layer
  std::vector<Eigen::VectorXd> post;  // post-activation per layer
};

struct MlpGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static MlpGrads zeros_like(const MlpParams& params);
  MlpGrads& operator+=(const MlpGrads& other);
  MlpGrads& operator*=(double factor);
  double squared_norm() const;
};

/// Evaluates the network; records activations when `tape` is non-null.
/// Throws std::invalid_argument on an input length mismatch.
Eigen::VectorXd mlp_forward(const MlpParams& params, const Eigen::VectorXd& input,
                            MlpTape* tape = nullptr);

/// Gradients of output . upstream + l2_penalty(params) with respect to
/// every weight and bias, from a recorded tape.
MlpGrads mlp_gradients(const MlpParams& params, const MlpTape& tape,
                       const Eigen::VectorXd& upstream);

/// 0.5 * weight_decay * sum of squared weights (biases excluded).
double l2_penalty(const MlpParams& params);

}  // namespace qprl::math
