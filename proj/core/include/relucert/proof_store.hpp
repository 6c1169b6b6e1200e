#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "relucert/abstraction.hpp"
#include "relucert/box.hpp"
#include "relucert/lipschitz.hpp"
#include "relucert/net_abstraction.hpp"
#include "relucert/network.hpp"

namespace relucert {

/// Reuse mechanisms, ordered roughly by per-check cost.
enum class Mechanism {
  AlreadyProven,      // the stored proof covers the new problem as-is
  LipschitzWiden,     // widen the stored output set by ell * kappa
  EarlyLayers,        // exact check of the first layers into the stored chain
  LayerReentry,       // fresh prefix abstractions re-enter the stored chain
  AbstractionReuse,   // the stored merged network still dominates
  PerLayerTransfer,   // one exact check per layer against the stored chain
  SegmentedTransfer,  // multi-layer segments against selected chain entries
  LocalRepair,        // replace one failing chain entry and re-propagate
  FullVerify,
};

std::string to_string(Mechanism m);
Mechanism mechanism_from_string(const std::string& s);

/// Persisted bundle proving one problem: the state abstraction chain, an
/// optional Lipschitz bound and an optional network abstraction, plus the
/// hashes and timings a later run needs to decide what can be reused.
struct ProofArtifact {
  static constexpr int kFormat = 1;

  std::string problem_hash;
  std::string network_hash;
  Box d_out;
  StateAbstraction state_abs;
  std::optional<LipschitzBound> lipschitz;
  std::optional<AbstractNetwork> net_abs;
  std::string tool_version;
  std::map<std::string, double> timings;  // phase -> seconds

  const Box& d_in() const { return state_abs.input_box; }
};

/// Written atomically (temp file + rename). Only proven problems may be
/// persisted; save re-checks the output containment before writing.
void save_artifact(const ProofArtifact& artifact, const std::string& path);

/// Re-validates every structural invariant (format, box sanity, final
/// containment in d_out, hash consistency of the network abstraction) and
/// throws on any violation; a rejected artifact is never partially usable.
ProofArtifact load_artifact(const std::string& path);

/// How the new problem differs from the one the artifact proves.
enum class ProblemChange {
  None,             // identical (or the new input box is a subset)
  DomainEnlarged,   // same network, larger input box
  NetworkChanged,   // different parameters, same architecture
  OutputChanged,    // d_out differs: nothing can be reused
};

struct Applicability {
  ProblemChange change = ProblemChange::None;
  std::set<Mechanism> mechanisms;
  /// Input box all reuse checks quantify over: the hull of the stored and
  /// the new d_in.
  Box enlarged;
  std::vector<std::string> warnings;
};

/// Classifies the change between the artifact's problem and `problem` and
/// lists the reuse mechanisms worth attempting.
Applicability artifact_applicability(const ProofArtifact& artifact,
                                     const VerificationProblem& problem);

}  // namespace relucert
