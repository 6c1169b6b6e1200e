#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <optional>
#include <string>
#include <utility>

#include "relucert/abstraction.hpp"
#include "relucert/box.hpp"
#include "relucert/network.hpp"

namespace relucert {

/// Does the image of input_set under layers from_layer..to_layer stay
/// inside target_set?
struct ContainmentQuery {
  Network network;
  int from_layer = 1;
  int to_layer = 1;
  Box input_set;
  Box target_set;
};

struct Budget {
  long max_splits = 100000;
  std::chrono::duration<double> max_time = std::chrono::seconds(60);
  double min_box_width = 1e-9;
};

enum class Verdict { Proven, Refuted, Unknown };

std::string to_string(Verdict v);

struct CheckStats {
  long splits = 0;
  long nodes = 0;
  int max_depth = 0;
  double wall_seconds = 0.0;
};

struct CheckResult {
  Verdict verdict = Verdict::Unknown;
  /// On Refuted: a concrete input to layer `witness_from_layer` whose image
  /// violates the target set (re-evaluated before returning).
  std::optional<Eigen::VectorXd> witness;
  int witness_from_layer = 1;
  CheckStats stats;
  std::string note;
  /// Set by abstraction-based verification when the abstract counterexample
  /// does not violate on the concrete network.
  bool spurious = false;

  bool proven() const { return verdict == Verdict::Proven; }
  bool refuted() const { return verdict == Verdict::Refuted; }
};

struct CheckerConfig {
  /// Extra containment slack demanded from Proven verdicts.
  double sound_margin = 0.0;
  /// Worker threads for branch-and-bound rounds; 0 picks a default.
  int workers = 0;
};

/// Complete (up to budget) containment check via branch-and-bound over input
/// splits with symbolic-interval bounding. Proven means every point of
/// input_set maps into target_set; Refuted carries a concrete witness;
/// Unknown is only returned when the budget ran out. The verdict is
/// deterministic for a fixed query and split budget regardless of worker
/// count (time-limited Unknown excepted).
CheckResult check_containment(const ContainmentQuery& query,
                              const Budget& budget,
                              const CheckerConfig& config = {});

struct OutputBoundResult {
  double lower = 0.0;  // witnessed by `arg`
  double upper = 0.0;
  Eigen::VectorXd arg;
  CheckStats stats;
};

/// Certified enclosure of the maximum value of one output neuron of the
/// layer range over input_set. The width of the enclosure shrinks with
/// budget; `target_width` stops refinement early once reached.
OutputBoundResult max_output(const Network& net, int from_layer, int to_layer,
                             const Box& input_set, int neuron,
                             const Budget& budget,
                             const CheckerConfig& config = {},
                             double target_width = 1e-6);

/// Same for the minimum value.
OutputBoundResult min_output(const Network& net, int from_layer, int to_layer,
                             const Box& input_set, int neuron,
                             const Budget& budget,
                             const CheckerConfig& config = {},
                             double target_width = 1e-6);

/// Full-network verification. On Proven the returned abstraction is the
/// layerwise hull of the concretized boxes of all proven branch-and-bound
/// leaves; its chain_consistent flag reports whether those hulls happen to
/// form a valid chain (they are always sound for the reachable sets).
std::pair<CheckResult, StateAbstraction> verify_full(
    const VerificationProblem& problem, const Budget& budget,
    const CheckerConfig& config = {});

void validate_budget(const Budget& budget);

}  // namespace relucert
