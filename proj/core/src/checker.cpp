#include "relucert/checker.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "relucert/digest.hpp"
#include "relucert/parallel.hpp"

namespace relucert {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Proven: return "proven";
    case Verdict::Refuted: return "refuted";
    case Verdict::Unknown: return "unknown";
  }
  return "unknown";
}

void validate_budget(const Budget& budget) {
  if (budget.max_splits <= 0 || budget.max_time.count() <= 0.0 ||
      budget.min_box_width <= 0.0) {
    throw std::invalid_argument("budget fields must all be positive");
  }
}

namespace {

using Clock = std::chrono::steady_clock;

struct Node {
  Box box;
  int depth = 0;
};

bool contained_with_margin(const Box& inner, const Box& outer, double margin) {
  for (Eigen::Index i = 0; i < inner.dim(); ++i) {
    if (inner.lo()[i] < outer.lo()[i] + margin) return false;
    if (inner.hi()[i] > outer.hi()[i] - margin) return false;
  }
  return true;
}

bool violates(const Eigen::VectorXd& y, const Box& target) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] > target.hi()[i] || y[i] < target.lo()[i]) return true;
  }
  return false;
}

/// Corner of `box` maximizing the affine form with the given coefficients.
Eigen::VectorXd maximizing_corner(const Eigen::RowVectorXd& coef,
                                  const Box& box) {
  Eigen::VectorXd x(box.dim());
  for (Eigen::Index j = 0; j < box.dim(); ++j) {
    x[j] = coef[j] >= 0.0 ? box.hi()[j] : box.lo()[j];
  }
  return x;
}

Eigen::VectorXd minimizing_corner(const Eigen::RowVectorXd& coef,
                                  const Box& box) {
  Eigen::VectorXd x(box.dim());
  for (Eigen::Index j = 0; j < box.dim(); ++j) {
    x[j] = coef[j] >= 0.0 ? box.lo()[j] : box.hi()[j];
  }
  return x;
}

/// Influence-weighted split dimension: the input interval scaled by the
/// total |coefficient| mass reaching unstable ReLUs; widest dimension when
/// no influence information is available. Ties break toward lower index.
Eigen::Index pick_split_dim(const Box& box, const Eigen::VectorXd& influence) {
  Eigen::Index best = 0;
  double best_score = -1.0;
  const bool use_influence = !influence.isZero(0.0);
  for (Eigen::Index j = 0; j < box.dim(); ++j) {
    const double w = box.hi()[j] - box.lo()[j];
    const double score = use_influence ? influence[j] * w : w;
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

struct BoundOutcome {
  bool proven = false;
  std::optional<Eigen::VectorXd> witness;
  Eigen::Index split_dim = 0;
  bool splittable = false;
  std::vector<Box> layer_boxes;  // only filled when collecting
};

}  // namespace

namespace detail {

/// One bounding step of the containment search; pure, runs concurrently.
static BoundOutcome bound_containment_node(const ContainmentQuery& q,
                                           const Node& node, double margin,
                                           double min_width, bool collect) {
  BoundOutcome out;
  SymBounds sym =
      propagate_symbolic(q.network, q.from_layer, q.to_layer, node.box);
  if (collect) out.layer_boxes = sym.layer_boxes;
  if (contained_with_margin(sym.output_box, q.target_set, margin)) {
    out.proven = true;
    return out;
  }

  // Candidate refutations: the box center plus, per violated output side,
  // the corner extremizing the corresponding affine form.
  auto try_point = [&](const Eigen::VectorXd& x) {
    if (out.witness) return;
    Eigen::VectorXd y = q.network.eval_range(q.from_layer, q.to_layer, x);
    if (violates(y, q.target_set)) out.witness = x;
  };
  try_point(node.box.center());
  for (Eigen::Index o = 0; o < sym.output_box.dim() && !out.witness; ++o) {
    if (sym.output_box.hi()[o] > q.target_set.hi()[o]) {
      try_point(maximizing_corner(sym.upper_coef.row(o), node.box));
    }
    if (!out.witness && sym.output_box.lo()[o] < q.target_set.lo()[o]) {
      try_point(minimizing_corner(sym.lower_coef.row(o), node.box));
    }
  }
  if (out.witness) return out;

  out.splittable = node.box.max_width() >= min_width;
  if (out.splittable) {
    out.split_dim = pick_split_dim(node.box, sym.unstable_influence);
  }
  return out;
}

}  // namespace detail

static void validate_query(const ContainmentQuery& q) {
  check_layer_range(q.network, q.from_layer, q.to_layer);
  if (q.input_set.dim() != q.network.layer_dim(q.from_layer - 1)) {
    throw std::invalid_argument("containment query: input_set dimension " +
                                std::to_string(q.input_set.dim()) +
                                " does not match layer " +
                                std::to_string(q.from_layer) + " input");
  }
  if (q.target_set.dim() != q.network.layer_dim(q.to_layer)) {
    throw std::invalid_argument("containment query: target_set dimension " +
                                std::to_string(q.target_set.dim()) +
                                " does not match layer " +
                                std::to_string(q.to_layer) + " output");
  }
}

static CheckResult run_containment(const ContainmentQuery& q,
                                   const Budget& budget,
                                   const CheckerConfig& config,
                                   std::vector<Box>* collected) {
  validate_query(q);
  validate_budget(budget);
  const int workers = config.workers > 0 ? config.workers : default_workers();
  const auto start = Clock::now();

  CheckResult result;
  result.witness_from_layer = q.from_layer;
  std::deque<Node> frontier;
  frontier.push_back(Node{q.input_set, 0});
  long undecided = 0;
  std::string give_up_reason;

  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };

  while (!frontier.empty()) {
    if (elapsed() > budget.max_time.count()) {
      result.verdict = Verdict::Unknown;
      result.note = "time budget exhausted";
      result.stats.wall_seconds = elapsed();
      return result;
    }
    std::vector<Node> batch(frontier.begin(), frontier.end());
    frontier.clear();
    auto outcomes = parallel_map(batch.size(), workers, [&](std::size_t i) {
      return detail::bound_containment_node(q, batch[i], config.sound_margin,
                                            budget.min_box_width,
                                            collected != nullptr);
    });
    // Effects are applied in submission order, so the verdict, the witness
    // and the set of explored nodes do not depend on the worker count.
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Node& node = batch[i];
      BoundOutcome& out = outcomes[i];
      result.stats.nodes++;
      result.stats.max_depth = std::max(result.stats.max_depth, node.depth);
      if (out.proven) {
        if (collected) {
          if (collected->empty()) {
            *collected = std::move(out.layer_boxes);
          } else {
            for (std::size_t k = 0; k < collected->size(); ++k) {
              (*collected)[k] = (*collected)[k].hull(out.layer_boxes[k]);
            }
          }
        }
        continue;
      }
      if (out.witness) {
        result.verdict = Verdict::Refuted;
        result.witness = std::move(out.witness);
        result.stats.wall_seconds = elapsed();
        return result;
      }
      if (!out.splittable) {
        undecided++;
        give_up_reason = "minimum box width reached";
        continue;
      }
      if (result.stats.splits >= budget.max_splits) {
        undecided++;
        give_up_reason = "split budget exhausted";
        continue;
      }
      result.stats.splits++;
      const double at = 0.5 * (node.box.lo()[out.split_dim] +
                               node.box.hi()[out.split_dim]);
      auto halves = node.box.bisect(out.split_dim, at);
      frontier.push_back(Node{std::move(halves.first), node.depth + 1});
      frontier.push_back(Node{std::move(halves.second), node.depth + 1});
    }
  }

  result.verdict = undecided == 0 ? Verdict::Proven : Verdict::Unknown;
  if (undecided > 0) result.note = give_up_reason;
  result.stats.wall_seconds = elapsed();
  return result;
}

CheckResult check_containment(const ContainmentQuery& query,
                              const Budget& budget,
                              const CheckerConfig& config) {
  return run_containment(query, budget, config, nullptr);
}

namespace {

struct ExtremumNode {
  Box box;
  int depth = 0;
};

struct ExtremumBound {
  double bound = 0.0;  // certified one-sided bound for this node
  double sample_value = 0.0;
  Eigen::VectorXd sample_arg;
  bool exact = false;  // every ReLU stable: bound is attained by the sample corner
  Eigen::Index split_dim = 0;
  bool splittable = false;
};

OutputBoundResult extremum_output(const Network& net, int from_layer,
                                  int to_layer, const Box& input_set,
                                  int neuron, const Budget& budget,
                                  const CheckerConfig& config,
                                  double target_width, bool maximize) {
  check_layer_range(net, from_layer, to_layer);
  validate_budget(budget);
  if (input_set.dim() != net.layer_dim(from_layer - 1)) {
    throw std::invalid_argument("extremum query: input dimension mismatch");
  }
  if (neuron < 0 || neuron >= net.layer_dim(to_layer)) {
    throw std::invalid_argument("extremum query: neuron index out of range");
  }
  const int workers = config.workers > 0 ? config.workers : default_workers();
  const auto start = Clock::now();
  const double sign = maximize ? 1.0 : -1.0;

  // Everything below works on the maximization of sign * neuron value.
  auto bound_node = [&](const ExtremumNode& node) {
    ExtremumBound out;
    SymBounds sym = propagate_symbolic(net, from_layer, to_layer, node.box);
    out.bound = maximize ? sym.output_box.hi()[neuron]
                         : -sym.output_box.lo()[neuron];
    Eigen::VectorXd corner =
        maximize ? maximizing_corner(sym.upper_coef.row(neuron), node.box)
                 : minimizing_corner(sym.lower_coef.row(neuron), node.box);
    Eigen::VectorXd center = node.box.center();
    const double at_corner =
        sign * net.eval_range(from_layer, to_layer, corner)[neuron];
    const double at_center =
        sign * net.eval_range(from_layer, to_layer, center)[neuron];
    if (at_corner >= at_center) {
      out.sample_value = at_corner;
      out.sample_arg = std::move(corner);
    } else {
      out.sample_value = at_center;
      out.sample_arg = std::move(center);
    }
    out.exact = sym.all_stable;
    out.splittable = node.box.max_width() >= budget.min_box_width;
    if (out.splittable) {
      out.split_dim = pick_split_dim(node.box, sym.unstable_influence);
    }
    return out;
  };

  OutputBoundResult result;
  CheckStats& stats = result.stats;
  double best_lb = -std::numeric_limits<double>::infinity();
  double settled_ub = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_arg = input_set.center();
  std::deque<ExtremumNode> frontier;
  frontier.push_back(ExtremumNode{input_set, 0});

  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };

  double active_ub = std::numeric_limits<double>::infinity();
  bool budget_hit = false;
  while (!frontier.empty() && !budget_hit) {
    if (elapsed() > budget.max_time.count()) break;
    std::vector<ExtremumNode> batch(frontier.begin(), frontier.end());
    frontier.clear();
    auto bounds = parallel_map(batch.size(), workers, [&](std::size_t i) {
      return bound_node(batch[i]);
    });
    double next_active_ub = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < batch.size(); ++i) {
      ExtremumBound& out = bounds[i];
      stats.nodes++;
      stats.max_depth = std::max(stats.max_depth, batch[i].depth);
      if (out.sample_value > best_lb) {
        best_lb = out.sample_value;
        best_arg = std::move(out.sample_arg);
      }
      const bool converged = out.bound - best_lb <= target_width;
      if (out.exact || converged || out.bound <= best_lb) {
        settled_ub = std::max(settled_ub, out.bound);
        continue;
      }
      if (!out.splittable || stats.splits >= budget.max_splits) {
        settled_ub = std::max(settled_ub, out.bound);
        if (stats.splits >= budget.max_splits) budget_hit = true;
        continue;
      }
      stats.splits++;
      const double at = 0.5 * (batch[i].box.lo()[out.split_dim] +
                               batch[i].box.hi()[out.split_dim]);
      auto halves = batch[i].box.bisect(out.split_dim, at);
      frontier.push_back(ExtremumNode{std::move(halves.first),
                                      batch[i].depth + 1});
      frontier.push_back(ExtremumNode{std::move(halves.second),
                                      batch[i].depth + 1});
      next_active_ub = std::max(next_active_ub, out.bound);
    }
    active_ub = next_active_ub;
  }

  double upper = settled_ub;
  // Nodes still in the frontier keep their parents' bound as certificate.
  if (!frontier.empty()) upper = std::max(upper, active_ub);
  upper = std::max(upper, best_lb);
  result.lower = sign * best_lb;
  result.upper = sign * upper;
  if (!maximize) std::swap(result.lower, result.upper);
  result.arg = std::move(best_arg);
  stats.wall_seconds = elapsed();
  return result;
}

}  // namespace

OutputBoundResult max_output(const Network& net, int from_layer, int to_layer,
                             const Box& input_set, int neuron,
                             const Budget& budget, const CheckerConfig& config,
                             double target_width) {
  return extremum_output(net, from_layer, to_layer, input_set, neuron, budget,
                         config, target_width, true);
}

OutputBoundResult min_output(const Network& net, int from_layer, int to_layer,
                             const Box& input_set, int neuron,
                             const Budget& budget, const CheckerConfig& config,
                             double target_width) {
  return extremum_output(net, from_layer, to_layer, input_set, neuron, budget,
                         config, target_width, false);
}

std::pair<CheckResult, StateAbstraction> verify_full(
    const VerificationProblem& problem, const Budget& budget,
    const CheckerConfig& config) {
  ContainmentQuery query{problem.network, 1, problem.network.num_layers(),
                         problem.d_in, problem.d_out};
  std::vector<Box> collected;
  CheckResult result = run_containment(query, budget, config, &collected);

  StateAbstraction abs;
  abs.input_box = problem.d_in;
  abs.mode = AbstractionMode::Symbolic;
  abs.padding = 0.0;
  if (result.proven()) {
    abs.boxes = std::move(collected);
    abs.network_hash = network_digest(problem.network);
    abs.chain_consistent =
        check_chain_consistency(problem.network, problem.d_in, abs.boxes);
  }
  return {std::move(result), std::move(abs)};
}

}  // namespace relucert
