#include "relucert/abstraction.hpp"

#include <stdexcept>

namespace relucert {

std::string to_string(AbstractionMode m) {
  return m == AbstractionMode::Box ? "box" : "symbolic";
}

AbstractionMode abstraction_mode_from_string(const std::string& s) {
  if (s == "box") return AbstractionMode::Box;
  if (s == "symbolic") return AbstractionMode::Symbolic;
  throw std::invalid_argument("unknown abstraction mode \"" + s + "\"");
}

Box propagate_box(const Layer& layer, const Box& in_box) {
  if (in_box.dim() != layer.in_dim()) {
    throw std::invalid_argument("propagate_box: box dimension " +
                                std::to_string(in_box.dim()) +
                                " does not match layer input " +
                                std::to_string(layer.in_dim()));
  }
  const Eigen::MatrixXd pos = layer.weights.cwiseMax(0.0);
  const Eigen::MatrixXd neg = layer.weights.cwiseMin(0.0);
  Eigen::VectorXd lo = pos * in_box.lo() + neg * in_box.hi() + layer.bias;
  Eigen::VectorXd hi = pos * in_box.hi() + neg * in_box.lo() + layer.bias;
  if (layer.activation == Activation::ReLU) {
    lo = lo.cwiseMax(0.0);
    hi = hi.cwiseMax(0.0);
  }
  return Box(std::move(lo), std::move(hi));
}

SymBounds propagate_symbolic(const Network& net, int from_layer, int to_layer,
                             const Box& in_box) {
  check_layer_range(net, from_layer, to_layer);
  if (in_box.dim() != net.layer_dim(from_layer - 1)) {
    throw std::invalid_argument("propagate_symbolic: box dimension " +
                                std::to_string(in_box.dim()) +
                                " does not match layer " +
                                std::to_string(from_layer) + " input");
  }

  const Eigen::Index d0 = in_box.dim();
  SymBounds sym;
  sym.lower_coef = Eigen::MatrixXd::Identity(d0, d0);
  sym.upper_coef = Eigen::MatrixXd::Identity(d0, d0);
  sym.lower_const = Eigen::VectorXd::Zero(d0);
  sym.upper_const = Eigen::VectorXd::Zero(d0);
  sym.unstable_influence = Eigen::VectorXd::Zero(d0);

  // Tightest value of an affine form over in_box: pick the box side matching
  // each coefficient's sign.
  auto forms_min = [&](const Eigen::MatrixXd& coef, const Eigen::VectorXd& cst) {
    return (coef.cwiseMax(0.0) * in_box.lo() + coef.cwiseMin(0.0) * in_box.hi() +
            cst)
        .eval();
  };
  auto forms_max = [&](const Eigen::MatrixXd& coef, const Eigen::VectorXd& cst) {
    return (coef.cwiseMax(0.0) * in_box.hi() + coef.cwiseMin(0.0) * in_box.lo() +
            cst)
        .eval();
  };

  for (int k = from_layer; k <= to_layer; ++k) {
    const Layer& layer = net.layers()[k - 1];
    const Eigen::MatrixXd pos = layer.weights.cwiseMax(0.0);
    const Eigen::MatrixXd neg = layer.weights.cwiseMin(0.0);

    Eigen::MatrixXd lo_coef = pos * sym.lower_coef + neg * sym.upper_coef;
    Eigen::MatrixXd up_coef = pos * sym.upper_coef + neg * sym.lower_coef;
    Eigen::VectorXd lo_const =
        pos * sym.lower_const + neg * sym.upper_const + layer.bias;
    Eigen::VectorXd up_const =
        pos * sym.upper_const + neg * sym.lower_const + layer.bias;

    Eigen::VectorXd lo = forms_min(lo_coef, lo_const);
    Eigen::VectorXd hi = forms_max(up_coef, up_const);

    if (layer.activation == Activation::ReLU) {
      for (Eigen::Index i = 0; i < lo.size(); ++i) {
        if (lo[i] >= 0.0) continue;  // stably active, forms pass through
        if (hi[i] <= 0.0) {
          lo_coef.row(i).setZero();
          up_coef.row(i).setZero();
          lo_const[i] = 0.0;
          up_const[i] = 0.0;
          lo[i] = 0.0;
          hi[i] = 0.0;
          continue;
        }
        // Unstable: concretize this neuron and restart its affine form.
        sym.unstable_influence +=
            lo_coef.row(i).cwiseAbs().transpose() +
            up_coef.row(i).cwiseAbs().transpose();
        lo_coef.row(i).setZero();
        up_coef.row(i).setZero();
        lo_const[i] = 0.0;
        up_const[i] = hi[i];
        lo[i] = 0.0;
      }
    }

    sym.lower_coef = std::move(lo_coef);
    sym.upper_coef = std::move(up_coef);
    sym.lower_const = std::move(lo_const);
    sym.upper_const = std::move(up_const);
    sym.layer_boxes.emplace_back(std::move(lo), std::move(hi));
  }

  sym.output_box = sym.layer_boxes.back();
  sym.all_stable = sym.unstable_influence.isZero(0.0);
  return sym;
}

StateAbstraction build_state_abstraction(const Network& net, const Box& d_in,
                                         AbstractionMode mode, double padding) {
  if (padding < 0.0) {
    throw std::invalid_argument("build_state_abstraction: negative padding");
  }
  if (d_in.dim() != net.input_dim()) {
    throw std::invalid_argument("build_state_abstraction: d_in dimension " +
                                std::to_string(d_in.dim()) +
                                " does not match network input");
  }

  std::vector<Box> symbolic_boxes;
  if (mode == AbstractionMode::Symbolic) {
    symbolic_boxes =
        propagate_symbolic(net, 1, net.num_layers(), d_in).layer_boxes;
  }

  StateAbstraction abs;
  abs.input_box = d_in;
  abs.mode = mode;
  abs.padding = padding;
  abs.chain_consistent = true;

  Box current = d_in;
  for (int k = 1; k <= net.num_layers(); ++k) {
    const Layer& layer = net.layers()[k - 1];
    Box next = propagate_box(layer, current);
    if (mode == AbstractionMode::Symbolic) {
      // The symbolic box is at least as tight; the hull keeps the chain
      // condition (next contains the interval image of `current`) intact.
      next = next.hull(symbolic_boxes[k - 1]);
    }
    next = layer.activation == Activation::ReLU ? next.widened_nonneg(padding)
                                                : next.widened(padding);
    abs.boxes.push_back(next);
    current = std::move(next);
  }
  return abs;
}

bool check_chain_consistency(const Network& net, const Box& d_in,
                             const std::vector<Box>& boxes, double slack) {
  if (boxes.size() != static_cast<std::size_t>(net.num_layers())) {
    return false;
  }
  const Box* current = &d_in;
  for (int k = 1; k <= net.num_layers(); ++k) {
    if (boxes[k - 1].dim() != net.layer_dim(k)) return false;
    if (current->dim() != net.layer_dim(k - 1)) return false;
    Box image = propagate_box(net.layers()[k - 1], *current);
    if (!box_contains(boxes[k - 1], image, slack)) return false;
    current = &boxes[k - 1];
  }
  return true;
}

}  // namespace relucert
