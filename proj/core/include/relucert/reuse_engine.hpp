#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relucert/checker.hpp"
#include "relucert/lipschitz.hpp"
#include "relucert/proof_store.hpp"

namespace relucert {

struct NamedCheck {
  std::string name;
  CheckResult result;
};

enum class ReuseVerdict { ProvenByReuse, ProvenByFallback, Refuted, Unknown };

std::string to_string(ReuseVerdict v);

struct ReuseOutcome {
  ReuseVerdict verdict = ReuseVerdict::Unknown;
  std::optional<Mechanism> mechanism;
  std::vector<NamedCheck> subproblem_stats;
  /// Wall time across every reuse check that was attempted.
  double reuse_wall_seconds = 0.0;
  /// Wall time of the mechanism that decided the outcome.
  double mechanism_seconds = 0.0;
  /// Largest single subcheck of that mechanism; the honest cost measure for
  /// the conjunctive mechanisms whose subproblems run in parallel.
  double max_subproblem_seconds = 0.0;
  /// Summed wall time of every subcheck: the total work, as opposed to the
  /// parallel latency above.
  double total_check_seconds = 0.0;
  /// Measured fallback verification time, when the fallback ran.
  double full_seconds = 0.0;
  std::optional<ProofArtifact> fresh_artifact;
  std::vector<std::string> warnings;
};

struct ReuseConfig {
  /// Mechanisms to try, in order. Empty picks the default cascade for the
  /// detected change, cheapest checks first.
  std::vector<Mechanism> strategy;
  /// Cut layers for segmented transfer. Empty picks every second layer.
  std::vector<int> cuts;
  /// Overrides the computed enlargement distance.
  std::optional<double> kappa_override;
  CheckerConfig checker;
};

/// Exact check that the first (up to two) layers map the enlarged input box
/// into the stored chain entry; a success certifies the enlarged domain
/// because the rest of the stored chain is unchanged.
CheckResult check_early_layers(const Network& net, const Box& enlarged,
                               const StateAbstraction& chain,
                               const Budget& budget,
                               const CheckerConfig& config = {});

/// Builds fresh per-layer boxes over the enlarged domain and exact-checks,
/// layer by layer, whether they re-enter the stored chain; proven at the
/// first layer that does. The first instance is the early-layers composite
/// check itself; `skip_composite` avoids repeating it when it already ran.
CheckResult check_layer_reentry(const Network& net, const Box& enlarged,
                                const StateAbstraction& chain,
                                const Budget& budget,
                                const CheckerConfig& config = {},
                                bool skip_composite = false);

/// One exact subproblem per layer of the modified network against the
/// stored chain: enlarged -> S_1, each S_i -> S_{i+1}, S_{n-1} -> d_out.
/// The subproblems are independent, run on a worker pool, and re-prove the
/// whole chain for the modified network, so a stale chain is still safe to
/// feed in. Proven iff every subproblem is proven.
CheckResult check_per_layer_transfer(const Network& f_prime,
                                     const Box& enlarged,
                                     const StateAbstraction& chain,
                                     const Box& d_out, const Budget& budget,
                                     const CheckerConfig& config = {},
                                     std::vector<NamedCheck>* subchecks = nullptr);

/// Multi-layer generalization: `cuts` selects which chain entries are kept,
/// and each segment between consecutive cuts becomes one exact subproblem.
CheckResult check_segmented_transfer(const Network& f_prime,
                                     const Box& enlarged,
                                     const StateAbstraction& chain,
                                     const Box& d_out,
                                     const std::vector<int>& cuts,
                                     const Budget& budget,
                                     const CheckerConfig& config = {},
                                     std::vector<NamedCheck>* subchecks = nullptr);

/// Reuses the stored network abstraction: if the modified network is still
/// dominated by it, the stored abstraction verdict transfers. With an
/// enlarged domain the abstraction itself is additionally re-certified over
/// the enlargement (Lipschitz widening, early-layers check, or a direct
/// bound computation on the small abstract network).
CheckResult check_abstraction_transfer(const Network& f_prime,
                                       const ProofArtifact& artifact,
                                       const Box& d_out,
                                       const std::optional<Box>& enlarged,
                                       const Budget& budget,
                                       const CheckerConfig& config = {},
                                       std::vector<NamedCheck>* subchecks = nullptr);

/// Repairs a single failing chain entry: replaces S_{i+1} by the image of
/// S_i under the modified layer (joined with the old box), propagates
/// forward, and exact-checks whether the propagation re-enters the stored
/// chain or, failing that, whether the final sub-network image stays inside
/// d_out. Requires every other per-layer subproblem to have passed.
CheckResult repair_state_abstraction(const Network& f_prime,
                                     const StateAbstraction& chain,
                                     int failing_layer, const Box& d_out,
                                     const Budget& budget,
                                     const CheckerConfig& config = {},
                                     std::vector<NamedCheck>* subchecks = nullptr);

/// Runs the applicable reuse mechanisms in strategy order; the first proven
/// mechanism wins. When everything fails, falls back to full verification
/// and (on success) produces a fresh artifact.
ReuseOutcome reverify(const VerificationProblem& problem,
                      const ProofArtifact& artifact, const ReuseConfig& config,
                      const Budget& budget);

/// Full pipeline behind `verify`: branch-and-bound verification plus, on
/// success, assembly of the proof artifact (chain, Lipschitz bound,
/// optional network abstraction).
struct CertifyOptions {
  AbstractionMode mode = AbstractionMode::Symbolic;
  double padding = 0.0;
  bool with_lipschitz = true;
  Norm norm = Norm::Linf;
  std::optional<int> net_abs_target;
  double net_abs_margin = 0.0;
  Budget budget;
  CheckerConfig checker;
  std::string tool_version;
};

struct CertifyResult {
  CheckResult check;
  std::optional<ProofArtifact> artifact;
  std::map<std::string, double> timings;
  std::vector<std::string> warnings;
};

CertifyResult solve_and_certify(const VerificationProblem& problem,
                                const CertifyOptions& options);

std::vector<Mechanism> parse_strategy(const std::string& csv);

}  // namespace relucert
