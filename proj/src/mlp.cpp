#include "qprl/math/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace qprl::math {

bool MlpParams::finite() const {
  for (const auto& w : weights) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : biases) {
    if (!b.allFinite()) return false;
  }
  return true;
}

void MlpParams::validate() const {
  if (weights.empty() || weights.size() != biases.size()) {
    throw std::invalid_argument("mlp: weights/biases layer count mismatch");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != biases[l].size()) {
      throw std::invalid_argument("mlp: bias length does not match layer rows");
    }
    if (l > 0 && weights[l].cols() != weights[l - 1].rows()) {
      throw std::invalid_argument("mlp: layer dimensions do not chain");
    }
  }
  if (!finite()) throw std::invalid_argument("mlp: non-finite parameters");
}

MlpParams MlpParams::make(const std::vector<int>& dims, Rng& rng,
                          double weight_decay) {
  if (dims.size() < 2) {
    throw std::invalid_argument("mlp: need at least input and output dims");
  }
  MlpParams params;
  params.weight_decay = weight_decay;
  const int layers = static_cast<int>(dims.size()) - 1;
  for (int l = 0; l < layers; ++l) {
    const int in = dims[l];
    const int out = dims[l + 1];
    const bool output_layer = (l == layers - 1);
    // He-normal on hidden layers, Glorot-normal on the linear output.
    const double stddev = output_layer ? std::sqrt(2.0 / (in + out))
                                       : std::sqrt(2.0 / in);
    Eigen::MatrixXd w(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) w(r, c) = stddev * rng.normal();
    }
    params.weights.push_back(std::move(w));
    params.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  return params;
}

MlpGrads MlpGrads::zeros_like(const MlpParams& params) {
  MlpGrads grads;
  for (const auto& w : params.weights) {
    grads.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  }
  for (const auto& b : params.biases) {
    grads.biases.push_back(Eigen::VectorXd::Zero(b.size()));
  }
  return grads;
}

MlpGrads& MlpGrads::operator+=(const MlpGrads& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += other.weights[l];
    biases[l] += other.biases[l];
  }
  return *this;
}

MlpGrads& MlpGrads::operator*=(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : biases) b *= factor;
  return *this;
}

double MlpGrads::squared_norm() const {
  double total = 0.0;
  for (const auto& w : weights) total += w.squaredNorm();
  for (const auto& b : biases) total += b.squaredNorm();
  return total;
}

Eigen::VectorXd mlp_forward(const MlpParams& params, const Eigen::VectorXd& input,
                            MlpTape* tape) {
  if (input.size() != params.input_dim()) {
    throw std::invalid_argument("mlp_forward: input length mismatch");
  }
  if (tape) {
    tape->input = input;
    tape->pre.clear();
    tape->post.clear();
  }
  Eigen::VectorXd x = input;
  const int layers = params.num_layers();
  for (int l = 0; l < layers; ++l) {
    Eigen::VectorXd pre = params.weights[l] * x + params.biases[l];
    Eigen::VectorXd post;
    if (l == layers - 1) {
      post = pre;  // linear output
    } else {
      post = pre.unaryExpr([slope = params.leaky_slope](double v) {
        return v >= 0.0 ? v : slope * v;
      });
    }
    if (tape) {
      tape->pre.push_back(pre);
      tape->post.push_back(post);
    }
    x = std::move(post);
  }
  return x;
}

MlpGrads mlp_gradients(const MlpParams& params, const MlpTape& tape,
                       const Eigen::VectorXd& upstream) {
  if (upstream.size() != params.output_dim()) {
    throw std::invalid_argument("mlp_gradients: upstream length mismatch");
  }
  MlpGrads grads = MlpGrads::zeros_like(params);
  const int layers = params.num_layers();
  Eigen::VectorXd delta = upstream;  // d loss / d post of current layer
  for (int l = layers - 1; l >= 0; --l) {
    if (l != layers - 1) {
      // chain through the leaky rectifier
      for (int i = 0; i < delta.size(); ++i) {
        if (tape.pre[l](i) < 0.0) delta(i) *= params.leaky_slope;
      }
    }
    const Eigen::VectorXd& below = (l == 0) ? tape.input : tape.post[l - 1];
    grads.weights[l] = delta * below.transpose();
    grads.biases[l] = delta;
    if (l > 0) delta = params.weights[l].transpose() * delta;
  }
  if (params.weight_decay != 0.0) {
    for (int l = 0; l < layers; ++l) {
      grads.weights[l] += params.weight_decay * params.weights[l];
    }
  }
  return grads;
}

double l2_penalty(const MlpParams& params) {
  if (params.weight_decay == 0.0) return 0.0;
  double total = 0.0;
  for (const auto& w : params.weights) total += w.squaredNorm();
  return 0.5 * params.weight_decay * total;
}

}  // namespace qprl::math
