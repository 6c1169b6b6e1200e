#include "relucert/reuse_engine.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "relucert/digest.hpp"
#include "relucert/parallel.hpp"

namespace relucert {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const Box& chain_box(const StateAbstraction& chain, int layer) {
  return chain.boxes[static_cast<std::size_t>(layer) - 1];
}

void require_matching_widths(const Network& net,
                             const StateAbstraction& chain) {
  if (chain.boxes.size() != static_cast<std::size_t>(net.num_layers())) {
    throw std::invalid_argument("stored chain has " +
                                std::to_string(chain.boxes.size()) +
                                " layers, network has " +
                                std::to_string(net.num_layers()));
  }
  for (int k = 1; k <= net.num_layers(); ++k) {
    if (chain_box(chain, k).dim() != net.layer_dim(k)) {
      throw std::invalid_argument("stored chain width mismatch at layer " +
                                  std::to_string(k));
    }
  }
}

}  // namespace

std::string to_string(ReuseVerdict v) {
  switch (v) {
    case ReuseVerdict::ProvenByReuse: return "proven-by-reuse";
    case ReuseVerdict::ProvenByFallback: return "proven-by-fallback";
    case ReuseVerdict::Refuted: return "refuted";
    case ReuseVerdict::Unknown: return "unknown";
  }
  return "unknown";
}

CheckResult check_early_layers(const Network& net, const Box& enlarged,
                               const StateAbstraction& chain,
                               const Budget& budget,
                               const CheckerConfig& config) {
  require_matching_widths(net, chain);
  // With fewer than three layers this degenerates into checking the whole
  // network against its stored output abstraction, which is still sound.
  const int k = std::min(2, net.num_layers());
  ContainmentQuery query{net, 1, k, enlarged, chain_box(chain, k)};
  return check_containment(query, budget, config);
}

CheckResult check_layer_reentry(const Network& net, const Box& enlarged,
                                const StateAbstraction& chain,
                                const Budget& budget,
                                const CheckerConfig& config,
                                bool skip_composite) {
  require_matching_widths(net, chain);
  const auto t0 = Clock::now();
  CheckResult aggregate;

  // The first instance is the two-layer composite over the enlarged box,
  // which subsumes the early-layers check.
  if (!skip_composite) {
    CheckResult first = check_early_layers(net, enlarged, chain, budget,
                                           config);
    aggregate.stats.nodes += first.stats.nodes;
    aggregate.stats.splits += first.stats.splits;
    if (first.proven()) {
      first.stats = aggregate.stats;
      first.note = "re-entered stored chain at layer " +
                   std::to_string(std::min(2, net.num_layers()));
      first.stats.wall_seconds = seconds_since(t0);
      return first;
    }
  }

  // From layer 2 on: fresh interval prefix boxes, one exact layer step each.
  Box fresh = propagate_box(net.layers()[0], enlarged);
  for (int j = 2; j < net.num_layers(); ++j) {
    fresh = propagate_box(net.layers()[j - 1], fresh);
    ContainmentQuery query{net, j + 1, j + 1, fresh, chain_box(chain, j + 1)};
    CheckResult step = check_containment(query, budget, config);
    aggregate.stats.nodes += step.stats.nodes;
    aggregate.stats.splits += step.stats.splits;
    if (step.proven()) {
      aggregate.verdict = Verdict::Proven;
      aggregate.note = "re-entered stored chain at layer " +
                       std::to_string(j + 1);
      aggregate.stats.wall_seconds = seconds_since(t0);
      return aggregate;
    }
  }
  aggregate.verdict = Verdict::Unknown;
  aggregate.note = "fresh boxes never re-entered the stored chain";
  aggregate.stats.wall_seconds = seconds_since(t0);
  return aggregate;
}

namespace {

/// Runs a conjunction of independent containment subproblems on the worker
/// pool. Proven iff all proven; the first non-proven subproblem (in fixed
/// order) decides the aggregate verdict.
CheckResult run_conjunction(const std::vector<ContainmentQuery>& queries,
                            const std::vector<std::string>& names,
                            const Budget& budget, const CheckerConfig& config,
                            std::vector<NamedCheck>* subchecks) {
  const auto t0 = Clock::now();
  const int workers = config.workers > 0 ? config.workers : default_workers();
  CheckerConfig inner = config;
  inner.workers = 1;  // parallelism lives at the subproblem level here
  auto results = parallel_map(queries.size(), workers, [&](std::size_t i) {
    return check_containment(queries[i], budget, inner);
  });

  CheckResult aggregate;
  aggregate.verdict = Verdict::Proven;
  double max_sub = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const CheckResult& sub = results[i];
    aggregate.stats.nodes += sub.stats.nodes;
    aggregate.stats.splits += sub.stats.splits;
    max_sub = std::max(max_sub, sub.stats.wall_seconds);
    if (!sub.proven() && aggregate.proven()) {
      aggregate.verdict = sub.verdict;
      aggregate.witness = sub.witness;
      aggregate.witness_from_layer = sub.witness_from_layer;
      aggregate.note = "subproblem \"" + names[i] + "\" " +
                       to_string(sub.verdict);
    }
    if (subchecks) subchecks->push_back(NamedCheck{names[i], sub});
  }
  aggregate.stats.max_depth = static_cast<int>(queries.size());
  aggregate.stats.wall_seconds = seconds_since(t0);
  // Convention for parallel conjunctions: the honest latency is the largest
  // subproblem, which callers can recover from the subcheck list; the
  // aggregate keeps the measured wall time.
  (void)max_sub;
  return aggregate;
}

}  // namespace

CheckResult check_per_layer_transfer(const Network& f_prime,
                                     const Box& enlarged,
                                     const StateAbstraction& chain,
                                     const Box& d_out, const Budget& budget,
                                     const CheckerConfig& config,
                                     std::vector<NamedCheck>* subchecks) {
  require_matching_widths(f_prime, chain);
  const int n = f_prime.num_layers();
  std::vector<ContainmentQuery> queries;
  std::vector<std::string> names;
  if (n == 1) {
    queries.push_back(ContainmentQuery{f_prime, 1, 1, enlarged, d_out});
    names.push_back("input->output");
  } else {
    queries.push_back(
        ContainmentQuery{f_prime, 1, 1, enlarged, chain_box(chain, 1)});
    names.push_back("input->S1");
    for (int i = 1; i <= n - 2; ++i) {
      queries.push_back(ContainmentQuery{f_prime, i + 1, i + 1,
                                         chain_box(chain, i),
                                         chain_box(chain, i + 1)});
      names.push_back("S" + std::to_string(i) + "->S" + std::to_string(i + 1));
    }
    queries.push_back(ContainmentQuery{f_prime, n, n, chain_box(chain, n - 1),
                                       d_out});
    names.push_back("S" + std::to_string(n - 1) + "->output");
  }
  return run_conjunction(queries, names, budget, config, subchecks);
}

CheckResult check_segmented_transfer(const Network& f_prime,
                                     const Box& enlarged,
                                     const StateAbstraction& chain,
                                     const Box& d_out,
                                     const std::vector<int>& cuts,
                                     const Budget& budget,
                                     const CheckerConfig& config,
                                     std::vector<NamedCheck>* subchecks) {
  require_matching_widths(f_prime, chain);
  const int n = f_prime.num_layers();
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (cuts[i] < 2 || cuts[i] > n - 2) {
      throw std::invalid_argument("segment cut " + std::to_string(cuts[i]) +
                                  " outside valid range [2, " +
                                  std::to_string(n - 2) + "]");
    }
    if (i > 0 && cuts[i] <= cuts[i - 1]) {
      throw std::invalid_argument("segment cuts must be strictly increasing");
    }
  }

  std::vector<ContainmentQuery> queries;
  std::vector<std::string> names;
  int from = 1;
  const Box* input = &enlarged;
  for (int cut : cuts) {
    queries.push_back(
        ContainmentQuery{f_prime, from, cut, *input, chain_box(chain, cut)});
    names.push_back("layers " + std::to_string(from) + "-" +
                    std::to_string(cut) + "->S" + std::to_string(cut));
    input = &chain_box(chain, cut);
    from = cut + 1;
  }
  queries.push_back(ContainmentQuery{f_prime, from, n, *input, d_out});
  names.push_back("layers " + std::to_string(from) + "-" + std::to_string(n) +
                  "->output");
  return run_conjunction(queries, names, budget, config, subchecks);
}

namespace {

/// Head-aware output containment of an abstraction chain: Inc heads are
/// checked against the upper side of d_out, Dec heads against the lower.
bool heads_within(const std::vector<OutputHead>& heads, const Box& s_n,
                  const Box& d_out, double widen) {
  for (std::size_t t = 0; t < heads.size(); ++t) {
    const Eigen::Index i = static_cast<Eigen::Index>(t);
    if (heads[t].direction == Direction::Inc) {
      if (s_n.hi()[i] + widen > d_out.hi()[heads[t].orig]) return false;
    } else {
      if (s_n.lo()[i] - widen < d_out.lo()[heads[t].orig]) return false;
    }
  }
  return true;
}

}  // namespace

CheckResult check_abstraction_transfer(const Network& f_prime,
                                       const ProofArtifact& artifact,
                                       const Box& d_out,
                                       const std::optional<Box>& enlarged,
                                       const Budget& budget,
                                       const CheckerConfig& config,
                                       std::vector<NamedCheck>* subchecks) {
  const auto t0 = Clock::now();
  CheckResult result;
  if (!artifact.net_abs) {
    result.note = "artifact stores no network abstraction";
    return result;
  }
  if (artifact.net_abs->source_hash != artifact.network_hash) {
    result.note = "stored abstraction was derived from a different network";
    return result;
  }
  const AbstractNetwork& abs = *artifact.net_abs;

  std::string diag;
  const Box* relation_box = enlarged ? &*enlarged : nullptr;
  bool holds = false;
  try {
    holds = check_abstraction_relation(f_prime, abs, &diag, relation_box);
  } catch (const std::invalid_argument& e) {
    result.note = e.what();
    result.stats.wall_seconds = seconds_since(t0);
    return result;
  }
  if (!holds) {
    result.note = "abstraction relation does not hold: " + diag;
    result.stats.wall_seconds = seconds_since(t0);
    return result;
  }

  if (!enlarged) {
    // Same domain: the stored verdict on the abstraction transfers directly.
    result.verdict = Verdict::Proven;
    result.note = "modified network still dominated by stored abstraction";
    result.stats.wall_seconds = seconds_since(t0);
    return result;
  }

  // Enlarged domain: the abstraction itself must be re-certified over the
  // enlargement. Its own chain and Lipschitz bound make that cheap.
  StateAbstraction abs_chain = build_state_abstraction(
      abs.network, abs.d_in, AbstractionMode::Box, 0.0);
  if (heads_within(abs.plan.heads, abs_chain.output_box(), d_out, 0.0)) {
    const LipschitzBound ell = lipschitz_upper_bound(abs.network, Norm::Linf);
    const double kappa = compute_kappa(abs.d_in, *enlarged, Norm::Linf);
    if (heads_within(abs.plan.heads, abs_chain.output_box(), d_out,
                     ell.value * kappa)) {
      result.verdict = Verdict::Proven;
      result.note = "abstraction re-certified by Lipschitz widening";
      result.stats.wall_seconds = seconds_since(t0);
      return result;
    }
    const int k = std::min(2, abs.network.num_layers());
    ContainmentQuery query{abs.network, 1, k, *enlarged,
                           chain_box(abs_chain, k)};
    CheckResult early = check_containment(query, budget, config);
    if (subchecks) {
      subchecks->push_back(NamedCheck{"abstraction early-layers", early});
    }
    result.stats.nodes += early.stats.nodes;
    result.stats.splits += early.stats.splits;
    if (early.proven()) {
      result.verdict = Verdict::Proven;
      result.note = "abstraction re-certified by early-layers check";
      result.stats.wall_seconds = seconds_since(t0);
      return result;
    }
  }
  // Last resort inside this mechanism: bound the abstraction itself over the
  // enlarged box; it is structurally smaller than the full network.
  AbstractNetwork widened = abs;
  widened.d_in = *enlarged;
  CheckResult direct =
      verify_via_abstraction(widened, d_out, budget, config, &f_prime);
  if (subchecks) {
    subchecks->push_back(NamedCheck{"abstraction direct bound", direct});
  }
  result.stats.nodes += direct.stats.nodes;
  result.stats.splits += direct.stats.splits;
  if (direct.proven()) {
    result.verdict = Verdict::Proven;
    result.note = "abstraction re-verified over the enlarged domain";
  } else {
    result.verdict = Verdict::Unknown;
    result.note = "abstraction could not be re-certified over the "
                  "enlargement";
  }
  result.stats.wall_seconds = seconds_since(t0);
  return result;
}

CheckResult repair_state_abstraction(const Network& f_prime,
                                     const StateAbstraction& chain,
                                     int failing_layer, const Box& d_out,
                                     const Budget& budget,
                                     const CheckerConfig& config,
                                     std::vector<NamedCheck>* subchecks) {
  require_matching_widths(f_prime, chain);
  const auto t0 = Clock::now();
  const int n = f_prime.num_layers();
  const int i = failing_layer;
  CheckResult result;
  if (i < 1 || i > n - 2) {
    result.note = "only a single interior chain entry can be repaired";
    return result;
  }

  // Replacement entry: image of the intact S_i under the modified layer,
  // joined with the old box so every previously covered state stays covered.
  Box repaired =
      propagate_box(f_prime.layers()[i], chain_box(chain, i))
          .hull(chain_box(chain, i + 1));

  Box current = repaired;
  for (int k = i + 2; k <= n - 2; ++k) {
    current = propagate_box(f_prime.layers()[k - 1], current);
    ContainmentQuery query{f_prime, k + 1, k + 1, current,
                           chain_box(chain, k + 1)};
    CheckResult step = check_containment(query, budget, config);
    if (subchecks) {
      subchecks->push_back(
          NamedCheck{"repaired S" + std::to_string(k) + "->S" +
                         std::to_string(k + 1),
                     step});
    }
    result.stats.nodes += step.stats.nodes;
    result.stats.splits += step.stats.splits;
    if (step.proven()) {
      result.verdict = Verdict::Proven;
      result.note = "repaired chain re-entered at layer " +
                    std::to_string(k + 1);
      result.stats.wall_seconds = seconds_since(t0);
      return result;
    }
  }

  // Propagation reached the end: check the sub-network from the repaired
  // entry against the safe output set directly.
  ContainmentQuery final_query{f_prime, i + 2, n, repaired, d_out};
  CheckResult final_step = check_containment(final_query, budget, config);
  if (subchecks) {
    subchecks->push_back(NamedCheck{"repaired sub-network->output", final_step});
  }
  result.stats.nodes += final_step.stats.nodes;
  result.stats.splits += final_step.stats.splits;
  if (final_step.proven()) {
    result.verdict = Verdict::Proven;
    result.note = "sub-network from repaired entry verified against d_out";
  } else {
    result.verdict = Verdict::Unknown;
    result.note = "repaired chain could not be re-certified";
  }
  result.stats.wall_seconds = seconds_since(t0);
  return result;
}

namespace {

std::vector<int> default_cuts(int n) {
  std::vector<int> cuts;
  for (int c = 2; c <= n - 2; c += 2) cuts.push_back(c);
  return cuts;
}

std::vector<Mechanism> default_strategy(ProblemChange change) {
  switch (change) {
    case ProblemChange::DomainEnlarged:
      return {Mechanism::LipschitzWiden, Mechanism::EarlyLayers,
              Mechanism::LayerReentry};
    case ProblemChange::NetworkChanged:
      return {Mechanism::AbstractionReuse, Mechanism::PerLayerTransfer,
              Mechanism::LocalRepair, Mechanism::SegmentedTransfer};
    default:
      return {};
  }
}

/// True when a reuse subcheck's refutation witness genuinely refutes the new
/// problem: it must be a real network input inside the new domain whose full
/// forward image leaves d_out.
bool concrete_refutation(const CheckResult& sub,
                         const VerificationProblem& problem) {
  if (!sub.refuted() || !sub.witness || sub.witness_from_layer != 1) {
    return false;
  }
  if (sub.witness->size() != problem.network.input_dim()) return false;
  if (!problem.d_in.contains_point(*sub.witness)) return false;
  const Eigen::VectorXd y = problem.network.eval(*sub.witness);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] < problem.d_out.lo()[i] || y[i] > problem.d_out.hi()[i]) {
      return true;
    }
  }
  return false;
}

}  // namespace

ReuseOutcome reverify(const VerificationProblem& problem,
                      const ProofArtifact& artifact, const ReuseConfig& config,
                      const Budget& budget) {
  const auto t0 = Clock::now();
  ReuseOutcome outcome;

  Applicability app = artifact_applicability(artifact, problem);
  outcome.warnings = app.warnings;

  if (app.change == ProblemChange::None) {
    outcome.verdict = ReuseVerdict::ProvenByReuse;
    outcome.mechanism = Mechanism::AlreadyProven;
    return outcome;
  }

  bool widths_match = true;
  try {
    require_matching_widths(problem.network, artifact.state_abs);
  } catch (const std::invalid_argument& e) {
    widths_match = false;
    outcome.warnings.push_back(std::string(e.what()) +
                               "; falling back to full verification");
  }

  std::vector<Mechanism> strategy =
      config.strategy.empty() ? default_strategy(app.change) : config.strategy;
  const int n = problem.network.num_layers();

  std::vector<NamedCheck> per_layer_subs;
  bool per_layer_ran = false;
  bool early_layers_ran = false;

  if (app.change != ProblemChange::OutputChanged && widths_match) {
    for (Mechanism mech : strategy) {
      if (app.mechanisms.count(mech) == 0 &&
          mech != Mechanism::LocalRepair) {
        continue;
      }
      const auto mech_start = Clock::now();
      std::vector<NamedCheck> subs;
      CheckResult check;
      switch (mech) {
        case Mechanism::LipschitzWiden: {
          const auto ls = Clock::now();
          const Enlargement enl =
              make_enlargement(artifact.d_in(), app.enlarged,
                               artifact.lipschitz->norm,
                               config.kappa_override);
          const bool ok =
              check_lipschitz_reuse(artifact.state_abs.output_box(),
                                    artifact.lipschitz->value, enl.kappa,
                                    problem.d_out);
          check.verdict = ok ? Verdict::Proven : Verdict::Unknown;
          check.note = "ell=" + std::to_string(artifact.lipschitz->value) +
                       " kappa=" + std::to_string(enl.kappa);
          check.stats.wall_seconds = seconds_since(ls);
          subs.push_back(NamedCheck{"lipschitz widening", check});
          break;
        }
        case Mechanism::EarlyLayers:
          check = check_early_layers(problem.network, app.enlarged,
                                     artifact.state_abs, budget,
                                     config.checker);
          early_layers_ran = true;
          subs.push_back(NamedCheck{"early-layers", check});
          break;
        case Mechanism::LayerReentry:
          check = check_layer_reentry(problem.network, app.enlarged,
                                      artifact.state_abs, budget,
                                      config.checker, early_layers_ran);
          subs.push_back(NamedCheck{"layer reentry", check});
          break;
        case Mechanism::AbstractionReuse: {
          std::optional<Box> enlarged;
          if (!box_contains(artifact.d_in(), problem.d_in, 0.0)) {
            enlarged = app.enlarged;
          }
          check = check_abstraction_transfer(problem.network, artifact,
                                             problem.d_out, enlarged, budget,
                                             config.checker, &subs);
          break;
        }
        case Mechanism::PerLayerTransfer:
          check = check_per_layer_transfer(problem.network, app.enlarged,
                                           artifact.state_abs, problem.d_out,
                                           budget, config.checker, &subs);
          per_layer_subs = subs;
          per_layer_ran = true;
          break;
        case Mechanism::SegmentedTransfer: {
          std::vector<int> cuts =
              config.cuts.empty() ? default_cuts(n) : config.cuts;
          if (cuts.empty()) {
            check.note = "network too shallow for segment cuts";
            break;
          }
          check = check_segmented_transfer(problem.network, app.enlarged,
                                           artifact.state_abs, problem.d_out,
                                           cuts, budget, config.checker,
                                           &subs);
          break;
        }
        case Mechanism::LocalRepair: {
          if (!per_layer_ran) {
            // The repair precondition is defined by the per-layer results.
            CheckResult all = check_per_layer_transfer(
                problem.network, app.enlarged, artifact.state_abs,
                problem.d_out, budget, config.checker, &per_layer_subs);
            per_layer_ran = true;
            subs = per_layer_subs;
            if (all.proven()) {
              // Nothing to repair: the per-layer conditions themselves prove
              // the property.
              check = all;
              mech = Mechanism::PerLayerTransfer;
              break;
            }
          }
          std::vector<int> failing;
          for (std::size_t s = 0; s < per_layer_subs.size(); ++s) {
            if (!per_layer_subs[s].result.proven()) {
              failing.push_back(static_cast<int>(s));
            }
          }
          if (failing.empty()) {
            check.note = "nothing to repair";
            break;
          }
          if (failing.size() > 1) {
            check.note = "more than one chain entry violated";
            break;
          }
          const int idx = failing.front();
          if (idx < 1 || idx > n - 2) {
            check.note = idx == 0
                             ? "first chain entry violated; nothing reusable"
                             : "output containment violated; not repairable";
            break;
          }
          check = repair_state_abstraction(problem.network,
                                           artifact.state_abs, idx,
                                           problem.d_out, budget,
                                           config.checker, &subs);
          break;
        }
        default:
          continue;
      }

      const double mech_seconds = seconds_since(mech_start);
      double max_sub = 0.0;
      for (const NamedCheck& nc : subs) {
        max_sub = std::max(max_sub, nc.result.stats.wall_seconds);
        outcome.total_check_seconds += nc.result.stats.wall_seconds;
        outcome.subproblem_stats.push_back(nc);
      }
      if (subs.empty()) {
        outcome.subproblem_stats.push_back(
            NamedCheck{to_string(mech), check});
      }

      if (check.proven()) {
        outcome.verdict = ReuseVerdict::ProvenByReuse;
        outcome.mechanism = mech;
        outcome.mechanism_seconds = mech_seconds;
        outcome.max_subproblem_seconds = max_sub > 0.0 ? max_sub : mech_seconds;
        outcome.reuse_wall_seconds = seconds_since(t0);
        return outcome;
      }
      // A failed reuse check may still have stumbled on a real
      // counterexample for the new problem.
      for (const NamedCheck& nc : subs) {
        if (concrete_refutation(nc.result, problem)) {
          outcome.verdict = ReuseVerdict::Refuted;
          outcome.mechanism = mech;
          outcome.mechanism_seconds = mech_seconds;
          outcome.max_subproblem_seconds =
              max_sub > 0.0 ? max_sub : mech_seconds;
          outcome.reuse_wall_seconds = seconds_since(t0);
          return outcome;
        }
      }
    }
  }
  outcome.reuse_wall_seconds = seconds_since(t0);

  // Every reuse route failed: verify from scratch and mint a fresh artifact.
  const auto full_start = Clock::now();
  CertifyOptions opts;
  opts.mode = artifact.state_abs.mode;
  opts.padding = artifact.state_abs.padding;
  opts.with_lipschitz = artifact.lipschitz.has_value();
  opts.norm = artifact.lipschitz ? artifact.lipschitz->norm : Norm::Linf;
  if (artifact.net_abs) {
    int widest = 1;
    for (const auto& groups : artifact.net_abs->plan.groups) {
      widest = std::max(widest, static_cast<int>(groups.size()));
    }
    bool merged = false;
    for (const auto& groups : artifact.net_abs->plan.groups) {
      for (const auto& g : groups) merged |= g.size() > 1;
    }
    opts.net_abs_target = merged ? widest : 0;
    opts.net_abs_margin = artifact.net_abs->margin;
  }
  opts.budget = budget;
  opts.checker = config.checker;
  opts.tool_version = artifact.tool_version;
  CertifyResult full = solve_and_certify(problem, opts);
  outcome.full_seconds = seconds_since(full_start);
  outcome.subproblem_stats.push_back(NamedCheck{"full verification",
                                                full.check});
  for (const std::string& w : full.warnings) outcome.warnings.push_back(w);

  switch (full.check.verdict) {
    case Verdict::Proven:
      outcome.verdict = ReuseVerdict::ProvenByFallback;
      outcome.mechanism = Mechanism::FullVerify;
      outcome.fresh_artifact = std::move(full.artifact);
      break;
    case Verdict::Refuted:
      outcome.verdict = ReuseVerdict::Refuted;
      outcome.mechanism = Mechanism::FullVerify;
      break;
    case Verdict::Unknown:
      outcome.verdict = ReuseVerdict::Unknown;
      outcome.mechanism = Mechanism::FullVerify;
      break;
  }
  outcome.mechanism_seconds = outcome.full_seconds;
  outcome.max_subproblem_seconds = outcome.full_seconds;
  return outcome;
}

CertifyResult solve_and_certify(const VerificationProblem& problem,
                                const CertifyOptions& options) {
  CertifyResult out;
  const auto t0 = Clock::now();
  auto [check, bb_abs] = verify_full(problem, options.budget, options.checker);
  out.timings["verify_full"] = seconds_since(t0);
  out.check = std::move(check);
  if (!out.check.proven()) {
    out.timings["total"] = seconds_since(t0);
    return out;
  }

  const auto t_chain = Clock::now();
  StateAbstraction chain = build_state_abstraction(
      problem.network, problem.d_in, options.mode, options.padding);
  chain.network_hash = network_digest(problem.network);
  out.timings["chain_build"] = seconds_since(t_chain);

  ProofArtifact artifact;
  artifact.network_hash = chain.network_hash;
  artifact.problem_hash =
      problem_digest(problem.network, problem.d_in, problem.d_out);
  artifact.d_out = problem.d_out;
  if (box_contains(problem.d_out, chain.output_box(), 0.0)) {
    artifact.state_abs = std::move(chain);
  } else {
    // The one-pass chain alone cannot justify the proof; store the hulls of
    // the proven branch-and-bound leaves instead. They are sound for every
    // reachable state but usually not chain-consistent, which disables the
    // layer-local reuse of an unchanged network and is recorded as such.
    out.warnings.push_back(
        "interval chain exceeds d_out; storing branch-and-bound hulls");
    artifact.state_abs = std::move(bb_abs);
    artifact.state_abs.padding = options.padding;
    artifact.state_abs.mode = options.mode;
  }

  if (options.with_lipschitz) {
    const auto t_lip = Clock::now();
    artifact.lipschitz = lipschitz_upper_bound(problem.network, options.norm);
    out.timings["lipschitz"] = seconds_since(t_lip);
  }

  if (options.net_abs_target) {
    const auto t_abs = Clock::now();
    // A non-positive target asks for the sign-split network without any
    // merging; the dominance margins alone then carry the reuse.
    const int target = *options.net_abs_target > 0
                           ? *options.net_abs_target
                           : std::numeric_limits<int>::max();
    try {
      AbstractNetwork abs =
          abstract_network(problem.network, problem.d_in, target,
                           options.net_abs_margin);
      CheckResult abs_check =
          verify_via_abstraction(abs, problem.d_out, options.budget,
                                 options.checker, &problem.network);
      if (abs_check.proven()) {
        artifact.net_abs = std::move(abs);
      } else {
        out.warnings.push_back(
            "network abstraction could not be verified against d_out (" +
            to_string(abs_check.verdict) + "); not stored");
      }
    } catch (const std::invalid_argument& e) {
      out.warnings.push_back(std::string("network abstraction skipped: ") +
                             e.what());
    }
    out.timings["net_abs"] = seconds_since(t_abs);
  }

  artifact.tool_version = options.tool_version;
  out.timings["total"] = seconds_since(t0);
  artifact.timings = out.timings;
  out.artifact = std::move(artifact);
  return out;
}

std::vector<Mechanism> parse_strategy(const std::string& csv) {
  std::vector<Mechanism> strategy;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) strategy.push_back(mechanism_from_string(token));
  }
  return strategy;
}

}  // namespace relucert
