#include "qprl/rl/checkpoint.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace qprl::rl {

namespace {

using nlohmann::json;

constexpr int kVersion = 1;

json net_to_json(const math::MlpParams& net) {
  json layers = json::array();
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const auto& w = net.weights[l];
    std::vector<double> flat(w.size());
    // row-major flattening, documented layout
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < w.cols(); ++c) flat[r * w.cols() + c] = w(r, c);
    }
    layers.push_back({{"rows", w.rows()},
                      {"cols", w.cols()},
                      {"weights", flat},
                      {"bias", std::vector<double>(net.biases[l].data(),
                                                   net.biases[l].data() +
                                                       net.biases[l].size())}});
  }
  return {{"layers", layers},
          {"weight_decay", net.weight_decay},
          {"leaky_slope", net.leaky_slope}};
}

math::MlpParams net_from_json(const json& j) {
  math::MlpParams net;
  net.weight_decay = j.at("weight_decay").get<double>();
  net.leaky_slope = j.at("leaky_slope").get<double>();
  for (const auto& layer : j.at("layers")) {
    const int rows = layer.at("rows").get<int>();
    const int cols = layer.at("cols").get<int>();
    const auto flat = layer.at("weights").get<std::vector<double>>();
    const auto bias = layer.at("bias").get<std::vector<double>>();
    if (static_cast<int>(flat.size()) != rows * cols ||
        static_cast<int>(bias.size()) != rows) {
      throw std::runtime_error("checkpoint: layer size mismatch");
    }
    Eigen::MatrixXd w(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) w(r, c) = flat[r * cols + c];
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::Map<const Eigen::VectorXd>(bias.data(), rows));
  }
  net.validate();
  return net;
}

}  // namespace

void save_checkpoint(const std::string& path, const ActorParams& actor,
                     const CriticParams& critic) {
  json j;
  j["version"] = kVersion;
  j["grid"] = {{"levels", critic.grid.levels},
               {"target_index", critic.grid.target_index}};
  j["actor"] = {{"net", net_to_json(actor.net)},
                {"head", actor.head == PolicyHead::GaussianSoftmax ? "gaussian"
                                                                   : "dirichlet"},
                {"sigma", actor.sigma},
                {"entropy_coef", actor.entropy_coef},
                {"concentration_bias", actor.concentration_bias}};
  j["critic"] = {{"online", net_to_json(critic.online)},
                 {"target", net_to_json(critic.target)},
                 {"order_penalty", critic.order_penalty},
                 {"soft_update_rate", critic.soft_update_rate},
                 {"td_scale", critic.td_scale}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json j;
  in >> j;
  if (j.at("version").get<int>() != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version");
  }
  Checkpoint ckpt;
  ckpt.critic.grid.levels = j.at("grid").at("levels").get<std::vector<double>>();
  ckpt.critic.grid.target_index = j.at("grid").at("target_index").get<int>();
  const auto& actor = j.at("actor");
  ckpt.actor.net = net_from_json(actor.at("net"));
  ckpt.actor.head = actor.at("head").get<std::string>() == "gaussian"
                        ? PolicyHead::GaussianSoftmax
                        : PolicyHead::Dirichlet;
  ckpt.actor.sigma = actor.at("sigma").get<double>();
  ckpt.actor.entropy_coef = actor.at("entropy_coef").get<double>();
  ckpt.actor.concentration_bias = actor.at("concentration_bias").get<double>();
  const auto& critic = j.at("critic");
  ckpt.critic.online = net_from_json(critic.at("online"));
  ckpt.critic.target = net_from_json(critic.at("target"));
  ckpt.critic.order_penalty = critic.at("order_penalty").get<double>();
  ckpt.critic.soft_update_rate = critic.at("soft_update_rate").get<double>();
  ckpt.critic.td_scale = critic.at("td_scale").get<double>();
  ckpt.critic.validate();
  ckpt.actor.validate();
  return ckpt;
}

}  // namespace qprl::rl
