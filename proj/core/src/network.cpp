#include "relucert/network.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <stdexcept>

namespace relucert {

using nlohmann::json;

std::string to_string(Activation a) {
  return a == Activation::ReLU ? "relu" : "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation \"" + s + "\"");
}

Eigen::VectorXd Layer::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd pre = weights * x + bias;
  if (activation == Activation::ReLU) {
    return pre.cwiseMax(0.0);
  }
  return pre;
}

namespace {

void validate_layer(const Layer& layer, int index, Eigen::Index expected_in) {
  const std::string where = "layer " + std::to_string(index);
  if (layer.weights.rows() == 0 || layer.weights.cols() == 0) {
    throw std::invalid_argument(where + ": empty weight matrix");
  }
  if (layer.weights.cols() != expected_in) {
    throw std::invalid_argument(
        where + ": weight columns (" + std::to_string(layer.weights.cols()) +
        ") do not match previous width (" + std::to_string(expected_in) + ")");
  }
  if (layer.bias.size() != layer.weights.rows()) {
    throw std::invalid_argument(
        where + ": bias length (" + std::to_string(layer.bias.size()) +
        ") does not match weight rows (" + std::to_string(layer.weights.rows()) +
        ")");
  }
  if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
    throw std::invalid_argument(where + ": non-finite weight or bias");
  }
}

}  // namespace

Network::Network(std::vector<Layer> layers, Eigen::Index input_dim,
                 std::string name, std::string version)
    : layers_(std::move(layers)),
      input_dim_(input_dim),
      name_(std::move(name)),
      version_(std::move(version)) {
  if (layers_.empty()) {
    throw std::invalid_argument("Network: at least one layer required");
  }
  if (input_dim_ <= 0) {
    throw std::invalid_argument("Network: input_dim must be positive");
  }
  Eigen::Index expected = input_dim_;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    validate_layer(layers_[k], static_cast<int>(k) + 1, expected);
    // Only the final layer may be Identity.
    if (k + 1 < layers_.size() &&
        layers_[k].activation != Activation::ReLU) {
      throw std::invalid_argument("layer " + std::to_string(k + 1) +
                                  ": hidden layers must use relu");
    }
    expected = layers_[k].out_dim();
  }
}

Eigen::Index Network::layer_dim(int k) const {
  if (k < 0 || k > num_layers()) {
    throw std::invalid_argument("layer_dim: index out of range");
  }
  return k == 0 ? input_dim_ : layers_[k - 1].out_dim();
}

Eigen::VectorXd Network::eval(const Eigen::VectorXd& x) const {
  return eval_range(1, num_layers(), x);
}

Eigen::VectorXd Network::eval_range(int from_layer, int to_layer,
                                    const Eigen::VectorXd& x) const {
  check_layer_range(*this, from_layer, to_layer);
  if (x.size() != layer_dim(from_layer - 1)) {
    throw std::invalid_argument(
        "eval_range: input has dimension " + std::to_string(x.size()) +
        ", layer " + std::to_string(from_layer) + " expects " +
        std::to_string(layer_dim(from_layer - 1)));
  }
  Eigen::VectorXd v = x;
  for (int k = from_layer; k <= to_layer; ++k) {
    v = layers_[k - 1].apply(v);
  }
  return v;
}

bool Network::same_architecture(const Network& other) const {
  if (input_dim_ != other.input_dim_ || layers_.size() != other.layers_.size())
    return false;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (layers_[k].out_dim() != other.layers_[k].out_dim() ||
        layers_[k].activation != other.layers_[k].activation)
      return false;
  }
  return true;
}

VerificationProblem::VerificationProblem(Network net, Box in, Box out)
    : network(std::move(net)), d_in(std::move(in)), d_out(std::move(out)) {
  if (d_in.dim() != network.input_dim()) {
    throw std::invalid_argument("VerificationProblem: d_in dimension " +
                                std::to_string(d_in.dim()) +
                                " does not match network input " +
                                std::to_string(network.input_dim()));
  }
  if (d_out.dim() != network.output_dim()) {
    throw std::invalid_argument("VerificationProblem: d_out dimension " +
                                std::to_string(d_out.dim()) +
                                " does not match network output " +
                                std::to_string(network.output_dim()));
  }
}

Network perturb(const Network& net, double magnitude, std::uint64_t seed) {
  if (magnitude < 0.0) {
    throw std::invalid_argument("perturb: magnitude must be >= 0");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-magnitude, magnitude);
  std::vector<Layer> layers = net.layers();
  for (Layer& layer : layers) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) += noise(rng);
      }
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      layer.bias[i] += noise(rng);
    }
  }
  return Network(std::move(layers), net.input_dim(), net.name(),
                 net.version());
}

void check_layer_range(const Network& net, int from_layer, int to_layer) {
  if (from_layer < 1 || to_layer > net.num_layers() || from_layer > to_layer) {
    throw std::invalid_argument(
        "invalid layer range [" + std::to_string(from_layer) + ", " +
        std::to_string(to_layer) + "] for a " +
        std::to_string(net.num_layers()) + "-layer network");
  }
}

namespace {

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument(where + ": weights must be a non-empty array");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j.at(0).size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = j.at(r);
    if (!row.is_array() || row.size() != cols) {
      throw std::invalid_argument(where + ": ragged weight matrix at row " +
                                  std::to_string(r));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row.at(c).is_number()) {
        throw std::invalid_argument(where + ": non-numeric weight at (" +
                                    std::to_string(r) + ", " +
                                    std::to_string(c) + ")");
      }
      m(r, c) = row.at(c).get<double>();
    }
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) {
    throw std::invalid_argument(where + ": bias must be an array");
  }
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j.at(i).is_number()) {
      throw std::invalid_argument(where + ": non-numeric bias entry " +
                                  std::to_string(i));
    }
    v[i] = j.at(i).get<double>();
  }
  return v;
}

}  // namespace

json network_to_json(const Network& net) {
  json doc;
  doc["name"] = net.name();
  doc["version"] = net.version();
  doc["input_dim"] = net.input_dim();
  json layers = json::array();
  for (const Layer& layer : net.layers()) {
    json jl;
    json w = json::array();
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        row.push_back(layer.weights(r, c));
      }
      w.push_back(std::move(row));
    }
    jl["weights"] = std::move(w);
    jl["bias"] = std::vector<double>(layer.bias.data(),
                                     layer.bias.data() + layer.bias.size());
    jl["activation"] = to_string(layer.activation);
    layers.push_back(std::move(jl));
  }
  doc["layers"] = std::move(layers);
  return doc;
}

Network network_from_json(const json& doc, const std::string& where) {
  for (const char* field : {"name", "version", "input_dim", "layers"}) {
    if (!doc.contains(field)) {
      throw std::invalid_argument(where + ": missing field \"" + field + "\"");
    }
  }
  std::vector<Layer> layers;
  int index = 0;
  for (const json& jl : doc.at("layers")) {
    ++index;
    const std::string at = where + ", layer " + std::to_string(index);
    for (const char* field : {"weights", "bias", "activation"}) {
      if (!jl.contains(field)) {
        throw std::invalid_argument(at + ": missing field \"" + field + "\"");
      }
    }
    Layer layer;
    layer.weights = matrix_from_json(jl.at("weights"), at);
    layer.bias = vector_from_json(jl.at("bias"), at);
    layer.activation = activation_from_string(jl.at("activation"));
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers), doc.at("input_dim").get<Eigen::Index>(),
                 doc.at("name").get<std::string>(),
                 doc.at("version").get<std::string>());
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open network file: " + path);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("parse error in " + path + ": " + e.what());
  }
  try {
    return network_from_json(doc, path);
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed network in " + path + ": " + e.what());
  }
}

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write network file: " + path);
  }
  out << network_to_json(net).dump(2) << "\n";
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

}  // namespace relucert
