#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "relucert/box.hpp"
#include "relucert/network.hpp"

namespace relucert {

enum class AbstractionMode { Box, Symbolic };

std::string to_string(AbstractionMode m);
AbstractionMode abstraction_mode_from_string(const std::string& s);

/// Sound interval image of one layer: interval arithmetic on the affine map,
/// then a clamp at zero for ReLU. Per output neuron the bound is the exact
/// hull of the layer image of `in_box`.
Box propagate_box(const Layer& layer, const Box& in_box);

/// Per-neuron affine enclosures over the inputs of some layer range:
/// lower_coef*x + lower_const <= neuron(x) <= upper_coef*x + upper_const for
/// every x in the analyzed input box. `output_box` is the concretization of
/// the final forms, `layer_boxes` the concretizations after each layer.
struct SymBounds {
  Eigen::MatrixXd lower_coef;
  Eigen::MatrixXd upper_coef;
  Eigen::VectorXd lower_const;
  Eigen::VectorXd upper_const;
  Box output_box;
  std::vector<Box> layer_boxes;
  /// Per input dimension, accumulated |coefficient| mass reaching unstable
  /// ReLUs. All zero iff every ReLU in the range was stable, in which case
  /// the enclosure is exact.
  Eigen::VectorXd unstable_influence;
  bool all_stable = false;
};

/// Symbolic-interval propagation of layers from_layer..to_layer over
/// `in_box`. Unstable ReLUs are concretized to their interval (the affine
/// form restarts there); stable ones pass their forms through. The
/// concretized boxes are never looser than the plain interval chain.
SymBounds propagate_symbolic(const Network& net, int from_layer, int to_layer,
                             const Box& in_box);

/// Per-layer sound over-approximations of the reachable activation sets.
/// When `chain_consistent` is true the boxes additionally satisfy the
/// chained containment g_{k+1}(boxes[k]) inside boxes[k+1] as full sets,
/// which is what layer-local reuse checks of an unchanged network rely on.
struct StateAbstraction {
  std::vector<Box> boxes;
  Box input_box;
  std::string network_hash;
  AbstractionMode mode = AbstractionMode::Box;
  double padding = 0.0;
  bool chain_consistent = false;

  const Box& output_box() const { return boxes.back(); }
};

/// Builds the layerwise abstraction chain over d_in.
///
/// Both modes produce a chain where each boxes[k+1] contains the interval
/// image of the full box boxes[k]; the interval chain is already the
/// tightest such chain, so symbolic mode concretizes its (tighter) forms
/// and then widens them back up to chain consistency. Each post-ReLU box is
/// padded outward by `padding` (clamped at zero from below), giving stored
/// proofs headroom against later parameter changes.
StateAbstraction build_state_abstraction(const Network& net, const Box& d_in,
                                         AbstractionMode mode,
                                         double padding = 0.0);

/// Verifies the chain conditions of an arbitrary box sequence against `net`
/// at the given slack: d_in maps into boxes[0], each boxes[k] maps into
/// boxes[k+1] under interval propagation.
bool check_chain_consistency(const Network& net, const Box& d_in,
                             const std::vector<Box>& boxes,
                             double slack = 0.0);

}  // namespace relucert
