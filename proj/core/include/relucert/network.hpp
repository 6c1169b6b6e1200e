#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "relucert/box.hpp"

namespace relucert {

enum class Activation { ReLU, Identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// One fully-connected layer: x -> act(W x + b). Rows of W are output
/// neurons.
struct Layer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
  Activation activation = Activation::ReLU;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

/// Feed-forward network: the composition of its layers, applied in order.
/// Immutable after construction; all member functions are const and safe to
/// call from concurrent workers.
class Network {
public:
  Network() = default;
  Network(std::vector<Layer> layers, Eigen::Index input_dim,
          std::string name = "", std::string version = "");

  const std::vector<Layer>& layers() const { return layers_; }
  Eigen::Index input_dim() const { return input_dim_; }
  Eigen::Index output_dim() const { return layers_.back().out_dim(); }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  const std::string& name() const { return name_; }
  const std::string& version() const { return version_; }

  /// Output width of layer k (1-based). Layer 0 means the raw input.
  Eigen::Index layer_dim(int k) const;

  /// Exact forward pass through all layers.
  Eigen::VectorXd eval(const Eigen::VectorXd& x) const;

  /// Composes layers from_layer..to_layer only (1-based, inclusive).
  /// `x` must match layer from_layer's input width.
  Eigen::VectorXd eval_range(int from_layer, int to_layer,
                             const Eigen::VectorXd& x) const;

  /// True if `other` has the same layer count and per-layer shapes.
  bool same_architecture(const Network& other) const;

private:
  std::vector<Layer> layers_;
  Eigen::Index input_dim_ = 0;
  std::string name_;
  std::string version_;
};

/// Safety verification problem: forall x in d_in, net(x) in d_out?
struct VerificationProblem {
  Network network;
  Box d_in;
  Box d_out;

  VerificationProblem(Network net, Box in, Box out);
};

/// Every weight and bias shifted by an independent uniform draw from
/// [-magnitude, +magnitude]. Deterministic given seed; structure unchanged.
/// Stands in for a fine-tuning step when generating benchmark variants.
Network perturb(const Network& net, double magnitude, std::uint64_t seed);

Network load_network(const std::string& path);
void save_network(const Network& net, const std::string& path);

nlohmann::json network_to_json(const Network& net);
Network network_from_json(const nlohmann::json& doc, const std::string& where);

/// Validates the range [from_layer, to_layer] against `net` and the input
/// width of `x`; throws std::invalid_argument with context on failure.
void check_layer_range(const Network& net, int from_layer, int to_layer);

}  // namespace relucert
