#pragma once

#include <Eigen/Dense>
#include <optional>
#include <random>
#include <vector>

#include "relucert/box.hpp"
#include "relucert/network.hpp"

namespace relucert::testing {

inline Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = static_cast<Eigen::Index>(rows.begin()->size());
  Eigen::MatrixXd m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

/// The 2-input demo net used throughout the suites:
///   n1 = relu(x1 - 2 x2), n2 = relu(-2 x1 + x2), n3 = relu(x1 - x2)
///   n4 = relu(2 n1 + 2 n2 - n3)
inline Network demo_net() {
  Layer l1{mat({{1, -2}, {-2, 1}, {1, -1}}), Eigen::VectorXd::Zero(3),
           Activation::ReLU};
  Layer l2{mat({{2, 2, -1}}), Eigen::VectorXd::Zero(1), Activation::ReLU};
  return Network({l1, l2}, 2, "demo", "1");
}

/// Uniform random point in a box.
inline Eigen::VectorXd sample_box(const Box& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd x(box.dim());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = box.lo()[i] + unit(rng) * (box.hi()[i] - box.lo()[i]);
  }
  return x;
}

/// Random ReLU net with the given layer widths (last entry is the output).
inline Network random_net(const std::vector<int>& widths, int input_dim,
                          std::mt19937_64& rng, double gain = 0.8,
                          Activation final_act = Activation::ReLU) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Layer> layers;
  int fan_in = input_dim;
  for (std::size_t k = 0; k < widths.size(); ++k) {
    Layer layer;
    const double scale = gain * std::sqrt(3.0 / fan_in);
    layer.weights = Eigen::MatrixXd(widths[k], fan_in);
    for (int r = 0; r < widths[k]; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weights(r, c) = scale * unit(rng);
    }
    layer.bias = Eigen::VectorXd(widths[k]);
    for (int r = 0; r < widths[k]; ++r) layer.bias[r] = 0.2 * unit(rng);
    layer.activation =
        k + 1 == widths.size() ? final_act : Activation::ReLU;
    layers.push_back(std::move(layer));
    fan_in = widths[k];
  }
  return Network(std::move(layers), input_dim, "rand", "1");
}

/// Independent oracle: exhaustive grid search for the maximum of one output
/// neuron of a 2-input layer range.
inline double grid_max_2d(const Network& net, int from, int to, const Box& box,
                          int neuron, int steps) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      Eigen::VectorXd x(2);
      x[0] = box.lo()[0] + (box.hi()[0] - box.lo()[0]) * i / steps;
      x[1] = box.lo()[1] + (box.hi()[1] - box.lo()[1]) * j / steps;
      best = std::max(best, net.eval_range(from, to, x)[neuron]);
    }
  }
  return best;
}

/// Independent oracle: grid search for a containment violation over a
/// 2-input range; returns a violating input when one exists on the grid.
inline std::optional<Eigen::VectorXd> grid_violation_2d(
    const Network& net, int from, int to, const Box& box, const Box& target,
    int steps) {
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      Eigen::VectorXd x(2);
      x[0] = box.lo()[0] + (box.hi()[0] - box.lo()[0]) * i / steps;
      x[1] = box.lo()[1] + (box.hi()[1] - box.lo()[1]) * j / steps;
      const Eigen::VectorXd y = net.eval_range(from, to, x);
      for (Eigen::Index o = 0; o < y.size(); ++o) {
        if (y[o] < target.lo()[o] || y[o] > target.hi()[o]) return x;
      }
    }
  }
  return std::nullopt;
}

/// Closed-form distance from a point to a box under a p-norm exponent
/// (p = 1, 2, or infinity via p <= 0).
inline double distance_to_box(const Eigen::VectorXd& x, const Box& box,
                              double p) {
  Eigen::VectorXd d(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    d[i] = std::max({box.lo()[i] - x[i], x[i] - box.hi()[i], 0.0});
  }
  if (p <= 0.0) return d.maxCoeff();
  if (p == 1.0) return d.sum();
  return d.norm();
}

}  // namespace relucert::testing
