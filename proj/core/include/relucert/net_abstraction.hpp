#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "relucert/box.hpp"
#include "relucert/checker.hpp"
#include "relucert/network.hpp"

namespace relucert {

enum class SignClass { Pos, Neg };
enum class Direction { Inc, Dec };

/// Category of a hidden-neuron copy after sign splitting: the sign of its
/// outgoing weights and whether raising its value raises (Inc) or lowers
/// (Dec) the network output bound being tracked.
struct NeuronCategory {
  SignClass sign = SignClass::Pos;
  Direction direction = Direction::Inc;

  bool operator==(const NeuronCategory&) const = default;
};

/// One sign-split copy of an original hidden neuron.
struct NeuronCopy {
  int orig = 0;
  NeuronCategory category;
};

/// Output head of the abstraction: Inc heads upper-bound the corresponding
/// source output, Dec heads lower-bound it.
struct OutputHead {
  int orig = 0;
  Direction direction = Direction::Inc;
};

/// Records how the abstraction was derived from the source network, so the
/// same transformation can be re-applied to a fine-tuned version:
/// per hidden layer the sign-split copies and their merge groups, and per
/// layer transition the copy each original edge was routed to.
struct MergePlan {
  Eigen::Index input_dim = 0;
  std::vector<Eigen::Index> source_widths;  // per layer, original widths
  /// copies[i] lists the splits of hidden layer i+1 (i in 0..n-2).
  std::vector<std::vector<NeuronCopy>> copies;
  /// groups[i] partitions copies[i] into merge groups; all members of a
  /// group share one category, which fixes the representative rule
  /// (max for Inc, min for Dec).
  std::vector<std::vector<std::vector<int>>> groups;
  /// routes[i](t, u): copy index in layer i+1 that the edge from original
  /// neuron u (layer i+1) to consumer copy t (layer i+2, or output head for
  /// the last entry) was assigned to at build time.
  std::vector<Eigen::MatrixXi> routes;
  std::vector<OutputHead> heads;

  int num_hidden() const { return static_cast<int>(copies.size()); }
};

/// Structurally smaller network whose Inc output heads dominate the source
/// network from above and Dec heads from below, for every input in d_in.
struct AbstractNetwork {
  Network network;
  MergePlan plan;
  double margin = 0.0;
  std::string source_hash;
  Box d_in;
};

/// Builds the abstraction by sign-splitting every hidden neuron into
/// single-category copies, then greedily merging closest same-category
/// copies per layer until each hidden layer has at most
/// target_neurons_per_layer neurons. A target at or above the post-split
/// width yields the unmerged split network. `margin` is added to every
/// representative weight and bias in the dominating direction so that small
/// parameter changes still pass check_abstraction_relation.
/// Requires a scalar-output network with at least one hidden layer.
AbstractNetwork abstract_network(const Network& net, const Box& d_in,
                                 int target_neurons_per_layer,
                                 double margin = 0.0);

/// Verifies the abstracted output range against d_out. Proven transfers to
/// any network the abstraction dominates. An abstract counterexample is
/// inconclusive: it is re-evaluated on `source` when given, yielding
/// Refuted if it violates concretely and Unknown (spurious flag set) if
/// not.
CheckResult verify_via_abstraction(const AbstractNetwork& abs,
                                   const Box& d_out, const Budget& budget,
                                   const CheckerConfig& config = {},
                                   const Network* source = nullptr);

/// True iff re-applying the stored plan to f_prime yields per-edge masses
/// dominated by the stored representative weights in each category's
/// direction (checked exactly), plus a sampled bound check over the input
/// box. False with a diagnostic when a dominance check fails or an edge's
/// sign class makes the plan inapplicable. `input_box` overrides the box
/// the layer-1 dominance is checked over (defaults to the recorded d_in).
bool check_abstraction_relation(const Network& f_prime,
                                const AbstractNetwork& abs,
                                std::string* diagnostic = nullptr,
                                const Box* input_box = nullptr);

nlohmann::json abstract_network_to_json(const AbstractNetwork& abs);
AbstractNetwork abstract_network_from_json(const nlohmann::json& doc,
                                           const std::string& where);

}  // namespace relucert
