#include "relucert/net_abstraction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <random>
#include <stdexcept>

#include "relucert/digest.hpp"

namespace relucert {

using nlohmann::json;

namespace {

Direction flip(Direction d) {
  return d == Direction::Inc ? Direction::Dec : Direction::Inc;
}

/// Category required of the source copy carrying an edge with build-time
/// weight `w` into a consumer of direction `consumer_dir`. Weight zero
/// counts as positive.
NeuronCategory edge_category(double w, Direction consumer_dir) {
  if (w >= 0.0) return {SignClass::Pos, consumer_dir};
  return {SignClass::Neg, flip(consumer_dir)};
}

constexpr std::array<NeuronCategory, 4> kCategoryOrder = {
    NeuronCategory{SignClass::Pos, Direction::Inc},
    NeuronCategory{SignClass::Pos, Direction::Dec},
    NeuronCategory{SignClass::Neg, Direction::Inc},
    NeuronCategory{SignClass::Neg, Direction::Dec},
};

int category_rank(const NeuronCategory& c) {
  for (int i = 0; i < 4; ++i) {
    if (kCategoryOrder[i] == c) return i;
  }
  return 0;
}

struct ConsumerView {
  int count = 0;
  // Direction and original-row weight access for consumer copy t.
  std::vector<Direction> dir;
  std::vector<int> orig;
};

/// Members of one merge group share `category`; `incoming` is the current
/// representative (weights over previous groups or raw inputs, then bias).
struct GroupState {
  std::vector<int> members;
  NeuronCategory category;
  Eigen::VectorXd incoming;  // representative weights + bias, for distances
};

double group_distance(const GroupState& a, const GroupState& b) {
  return (a.incoming - b.incoming).norm();
}

}  // namespace

AbstractNetwork abstract_network(const Network& net, const Box& d_in,
                                 int target_neurons_per_layer, double margin) {
  const int n = net.num_layers();
  if (n < 2) {
    throw std::invalid_argument("abstract_network: need at least one hidden "
                                "layer");
  }
  if (net.output_dim() != 1) {
    throw std::invalid_argument("abstract_network: scalar-output networks "
                                "only");
  }
  if (target_neurons_per_layer < 1) {
    throw std::invalid_argument("abstract_network: target must be >= 1");
  }
  if (margin < 0.0) {
    throw std::invalid_argument("abstract_network: negative margin");
  }
  if (d_in.dim() != net.input_dim()) {
    throw std::invalid_argument("abstract_network: d_in dimension mismatch");
  }
  const int hidden = n - 1;

  MergePlan plan;
  plan.input_dim = net.input_dim();
  for (int k = 1; k <= n; ++k) plan.source_widths.push_back(net.layer_dim(k));
  plan.heads = {OutputHead{0, Direction::Inc}, OutputHead{0, Direction::Dec}};
  plan.copies.resize(hidden);
  plan.routes.resize(hidden);
  plan.groups.resize(hidden);

  // Sign-split pass, last hidden layer first: a copy's category depends on
  // the directions of its consumers' copies.
  for (int j = hidden - 1; j >= 0; --j) {
    const Eigen::MatrixXd& w_out = net.layers()[j + 1].weights;
    ConsumerView consumers;
    if (j == hidden - 1) {
      consumers.count = static_cast<int>(plan.heads.size());
      for (const OutputHead& h : plan.heads) {
        consumers.dir.push_back(h.direction);
        consumers.orig.push_back(h.orig);
      }
    } else {
      consumers.count = static_cast<int>(plan.copies[j + 1].size());
      for (const NeuronCopy& c : plan.copies[j + 1]) {
        consumers.dir.push_back(c.category.direction);
        consumers.orig.push_back(c.orig);
      }
    }

    const int width = static_cast<int>(net.layer_dim(j + 1));
    // needed[u][rank]: whether orig neuron u needs a copy of that category.
    std::vector<std::array<bool, 4>> needed(width, {false, false, false, false});
    for (int t = 0; t < consumers.count; ++t) {
      for (int u = 0; u < width; ++u) {
        needed[u][category_rank(
            edge_category(w_out(consumers.orig[t], u), consumers.dir[t]))] =
            true;
      }
    }
    std::vector<std::vector<int>> copy_of(width, std::vector<int>(4, -1));
    for (int u = 0; u < width; ++u) {
      for (int r = 0; r < 4; ++r) {
        if (!needed[u][r]) continue;
        copy_of[u][r] = static_cast<int>(plan.copies[j].size());
        plan.copies[j].push_back(NeuronCopy{u, kCategoryOrder[r]});
      }
    }
    plan.routes[j] = Eigen::MatrixXi(consumers.count, width);
    for (int t = 0; t < consumers.count; ++t) {
      for (int u = 0; u < width; ++u) {
        const NeuronCategory cat =
            edge_category(w_out(consumers.orig[t], u), consumers.dir[t]);
        plan.routes[j](t, u) = copy_of[u][category_rank(cat)];
      }
    }
  }

  // Merge pass, first hidden layer onward. Incoming representatives at
  // layer j+1 are expressed over the groups already chosen for layer j.
  std::vector<Layer> abs_layers;
  std::vector<int> prev_group_of;  // copy index -> group index, previous layer
  int prev_group_count = 0;

  for (int j = 0; j < hidden; ++j) {
    const Layer& src_layer = net.layers()[j];
    const auto& copies = plan.copies[j];
    const int copy_count = static_cast<int>(copies.size());
    const Eigen::Index in_cols = j == 0 ? net.input_dim() : prev_group_count;

    // Member incoming vectors. For layer 1 these are the original rows; for
    // deeper layers the build-time edge masses accumulated per source group.
    std::vector<Eigen::VectorXd> member_in(copy_count);
    for (int c = 0; c < copy_count; ++c) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(in_cols + 1);
      const int o = copies[c].orig;
      if (j == 0) {
        v.head(in_cols) = src_layer.weights.row(o).transpose();
      } else {
        for (Eigen::Index u = 0; u < src_layer.weights.cols(); ++u) {
          const int s = plan.routes[j - 1](c, u);
          v[prev_group_of[s]] += src_layer.weights(o, u);
        }
      }
      v[in_cols] = src_layer.bias[o];
      member_in[c] = std::move(v);
    }

    std::vector<GroupState> groups;
    for (int c = 0; c < copy_count; ++c) {
      groups.push_back(GroupState{{c}, copies[c].category, member_in[c]});
    }

    auto refresh_incoming = [&](GroupState& g) {
      const bool inc = g.category.direction == Direction::Inc;
      Eigen::VectorXd rep = member_in[g.members.front()];
      for (std::size_t m = 1; m < g.members.size(); ++m) {
        const Eigen::VectorXd& mv = member_in[g.members[m]];
        rep = inc ? rep.cwiseMax(mv).eval() : rep.cwiseMin(mv).eval();
      }
      g.incoming = std::move(rep);
    };

    while (static_cast<int>(groups.size()) > target_neurons_per_layer) {
      int best_a = -1, best_b = -1;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < groups.size(); ++a) {
        for (std::size_t b = a + 1; b < groups.size(); ++b) {
          if (!(groups[a].category == groups[b].category)) continue;
          const double d = group_distance(groups[a], groups[b]);
          if (d < best_dist) {
            best_dist = d;
            best_a = static_cast<int>(a);
            best_b = static_cast<int>(b);
          }
        }
      }
      if (best_a < 0) break;  // no same-category pair left
      GroupState& ga = groups[best_a];
      GroupState& gb = groups[best_b];
      ga.members.insert(ga.members.end(), gb.members.begin(),
                        gb.members.end());
      std::sort(ga.members.begin(), ga.members.end());
      refresh_incoming(ga);
      groups.erase(groups.begin() + best_b);
    }

    // Assemble the representative rows, with the dominance margin applied
    // outward. Layer-1 margins live on the bias so that sign-indefinite
    // input boxes stay handled by the bias absorption term.
    const int group_count = static_cast<int>(groups.size());
    Layer abs_layer;
    abs_layer.weights = Eigen::MatrixXd::Zero(group_count, in_cols);
    abs_layer.bias = Eigen::VectorXd::Zero(group_count);
    abs_layer.activation = Activation::ReLU;
    std::vector<int> group_of(copy_count, 0);
    for (int g = 0; g < group_count; ++g) {
      const GroupState& grp = groups[g];
      const bool inc = grp.category.direction == Direction::Inc;
      for (int m : grp.members) group_of[m] = g;
      if (j == 0) {
        Eigen::VectorXd rep = member_in[grp.members.front()].head(in_cols);
        for (std::size_t m = 1; m < grp.members.size(); ++m) {
          const Eigen::VectorXd w = member_in[grp.members[m]].head(in_cols);
          rep = inc ? rep.cwiseMax(w).eval() : rep.cwiseMin(w).eval();
        }
        double beta = inc ? -std::numeric_limits<double>::infinity()
                          : std::numeric_limits<double>::infinity();
        for (int m : grp.members) {
          const Eigen::VectorXd w = member_in[m].head(in_cols);
          const double b = member_in[m][in_cols];
          const double cand = b + (w - rep).dot(d_in.lo());
          beta = inc ? std::max(beta, cand) : std::min(beta, cand);
        }
        abs_layer.weights.row(g) = rep.transpose();
        abs_layer.bias[g] = inc ? beta + margin : beta - margin;
      } else {
        // grp.incoming already holds the max/min-combined masses and bias.
        Eigen::VectorXd rep = grp.incoming.head(in_cols);
        const Eigen::VectorXd shifted =
            inc ? (rep.array() + margin).matrix().eval()
                : (rep.array() - margin).matrix().eval();
        abs_layer.weights.row(g) = shifted.transpose();
        abs_layer.bias[g] = inc ? grp.incoming[in_cols] + margin
                                : grp.incoming[in_cols] - margin;
      }
    }
    plan.groups[j].clear();
    for (const GroupState& g : groups) plan.groups[j].push_back(g.members);
    abs_layers.push_back(std::move(abs_layer));
    prev_group_of = std::move(group_of);
    prev_group_count = group_count;
  }

  // Output heads over the last hidden layer's groups.
  {
    const Layer& out_layer = net.layers()[n - 1];
    const int head_count = static_cast<int>(plan.heads.size());
    Layer abs_out;
    abs_out.weights = Eigen::MatrixXd::Zero(head_count, prev_group_count);
    abs_out.bias = Eigen::VectorXd::Zero(head_count);
    abs_out.activation = out_layer.activation;
    for (int t = 0; t < head_count; ++t) {
      const bool inc = plan.heads[t].direction == Direction::Inc;
      Eigen::VectorXd mass = Eigen::VectorXd::Zero(prev_group_count);
      for (Eigen::Index u = 0; u < out_layer.weights.cols(); ++u) {
        const int s = plan.routes[hidden - 1](t, u);
        mass[prev_group_of[s]] += out_layer.weights(plan.heads[t].orig, u);
      }
      const Eigen::VectorXd shifted =
          inc ? (mass.array() + margin).matrix().eval()
              : (mass.array() - margin).matrix().eval();
      abs_out.weights.row(t) = shifted.transpose();
      abs_out.bias[t] = inc ? out_layer.bias[plan.heads[t].orig] + margin
                            : out_layer.bias[plan.heads[t].orig] - margin;
    }
    abs_layers.push_back(std::move(abs_out));
  }

  AbstractNetwork abs{
      Network(std::move(abs_layers), net.input_dim(), net.name() + "#abs",
              net.version()),
      std::move(plan), margin, network_digest(net), d_in};

  // Construction sanity: the heads must dominate the source on samples. A
  // failure here is an implementation bug, not bad input.
  std::mt19937_64 rng(0x5eedab51u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < 256; ++s) {
    Eigen::VectorXd x(d_in.dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x[i] = d_in.lo()[i] + unit(rng) * (d_in.hi()[i] - d_in.lo()[i]);
    }
    const double fx = net.eval(x)[0];
    const Eigen::VectorXd ax = abs.network.eval(x);
    const double tol = 1e-9 * (1.0 + std::abs(fx));
    if (ax[0] < fx - tol || ax[1] > fx + tol) {
      throw std::logic_error("abstract_network: sampled dominance violation "
                             "during construction");
    }
  }
  return abs;
}

namespace {

struct DominanceContext {
  const AbstractNetwork& abs;
  const Network& f_prime;
  const Box& box;
  std::string* diagnostic;

  bool fail(const std::string& why) const {
    if (diagnostic) *diagnostic = why;
    return false;
  }
};

/// Mass contributed by one plan edge of the modified network, or a category
/// flip that makes the plan inapplicable (signalled through `flip_error`).
double edge_mass(double w_prime, Direction group_dir,
                 const NeuronCategory& source_cat, bool& flip_error) {
  if (source_cat.direction == Direction::Inc) {
    // Inc sources are only ever below their group value, so wrong-signed
    // contributions can be dropped soundly.
    return group_dir == Direction::Inc ? std::max(w_prime, 0.0)
                                       : std::min(w_prime, 0.0);
  }
  // Dec sources have no usable bound once an edge changes sign class.
  if ((source_cat.sign == SignClass::Pos && w_prime < 0.0) ||
      (source_cat.sign == SignClass::Neg && w_prime > 0.0)) {
    flip_error = true;
  }
  return w_prime;
}

/// Lowest value of (rep - w) . x + c over the box.
double affine_gap_min(const Eigen::VectorXd& coef, double cst,
                      const Box& box) {
  double acc = cst;
  for (Eigen::Index j = 0; j < coef.size(); ++j) {
    acc += coef[j] >= 0.0 ? coef[j] * box.lo()[j] : coef[j] * box.hi()[j];
  }
  return acc;
}

}  // namespace

bool check_abstraction_relation(const Network& f_prime,
                                const AbstractNetwork& abs,
                                std::string* diagnostic,
                                const Box* input_box) {
  const MergePlan& plan = abs.plan;
  const Box& box = input_box ? *input_box : abs.d_in;
  DominanceContext ctx{abs, f_prime, box, diagnostic};

  if (f_prime.input_dim() != plan.input_dim ||
      f_prime.num_layers() != static_cast<int>(plan.source_widths.size())) {
    throw std::invalid_argument("check_abstraction_relation: architecture "
                                "mismatch with the recorded plan");
  }
  for (int k = 1; k <= f_prime.num_layers(); ++k) {
    if (f_prime.layer_dim(k) != plan.source_widths[k - 1]) {
      throw std::invalid_argument(
          "check_abstraction_relation: layer " + std::to_string(k) +
          " width differs from the recorded plan");
    }
  }
  if (box.dim() != plan.input_dim) {
    throw std::invalid_argument("check_abstraction_relation: input box "
                                "dimension mismatch");
  }
  if (f_prime.layers().back().activation !=
      abs.network.layers().back().activation) {
    return ctx.fail("output activation differs from the abstraction");
  }

  const int hidden = plan.num_hidden();

  // Layer 1: box-aware affine dominance per group member.
  {
    const Layer& w1 = f_prime.layers()[0];
    const Layer& a1 = abs.network.layers()[0];
    for (std::size_t g = 0; g < plan.groups[0].size(); ++g) {
      const Direction dir =
          plan.copies[0][plan.groups[0][g].front()].category.direction;
      for (int member : plan.groups[0][g]) {
        const int o = plan.copies[0][member].orig;
        Eigen::VectorXd gap_coef;
        double gap_cst;
        if (dir == Direction::Inc) {
          gap_coef = (a1.weights.row(g) - w1.weights.row(o)).transpose();
          gap_cst = a1.bias[g] - w1.bias[o];
        } else {
          gap_coef = (w1.weights.row(o) - a1.weights.row(g)).transpose();
          gap_cst = w1.bias[o] - a1.bias[g];
        }
        if (affine_gap_min(gap_coef, gap_cst, box) < 0.0) {
          return ctx.fail("layer 1 dominance fails for neuron " +
                          std::to_string(o));
        }
      }
    }
  }

  // Deeper layers and output heads: per-edge mass dominance over groups.
  auto check_mass_layer = [&](int layer_idx, int consumer_count,
                              auto consumer_orig, auto consumer_dir,
                              auto group_members) -> bool {
    const Layer& wl = f_prime.layers()[layer_idx];
    const Layer& al = abs.network.layers()[layer_idx];
    const int j = layer_idx;  // routes[j-1] feeds layer_idx consumers
    const auto& src_copies = plan.copies[j - 1];
    const auto& src_groups = plan.groups[j - 1];
    std::vector<int> group_of(src_copies.size(), 0);
    for (std::size_t h = 0; h < src_groups.size(); ++h) {
      for (int m : src_groups[h]) group_of[m] = static_cast<int>(h);
    }
    for (int t = 0; t < consumer_count; ++t) {
      const Direction dir = consumer_dir(t);
      for (int member : group_members(t)) {
        const int o = consumer_orig(t, member);
        Eigen::VectorXd mass = Eigen::VectorXd::Zero(
            static_cast<Eigen::Index>(src_groups.size()));
        for (Eigen::Index u = 0; u < wl.weights.cols(); ++u) {
          const int s = plan.routes[j - 1](member >= 0 ? member : t, u);
          bool flip_error = false;
          mass[group_of[s]] += edge_mass(wl.weights(o, u), dir,
                                         src_copies[s].category, flip_error);
          if (flip_error) {
            ctx.fail("edge sign class flipped at layer " +
                     std::to_string(layer_idx + 1) + ", neuron " +
                     std::to_string(o) + ", source " + std::to_string(u) +
                     "; plan not applicable");
            return false;
          }
        }
        for (Eigen::Index h = 0; h < mass.size(); ++h) {
          const double rep = al.weights(t, h);
          if (dir == Direction::Inc ? rep < mass[h] : rep > mass[h]) {
            ctx.fail("weight dominance fails at layer " +
                     std::to_string(layer_idx + 1) + ", neuron " +
                     std::to_string(o));
            return false;
          }
        }
        const double rep_bias = al.bias[t];
        const double b = wl.bias[o];
        if (dir == Direction::Inc ? rep_bias < b : rep_bias > b) {
          ctx.fail("bias dominance fails at layer " +
                   std::to_string(layer_idx + 1) + ", neuron " +
                   std::to_string(o));
          return false;
        }
      }
    }
    return true;
  };

  for (int j = 1; j < hidden; ++j) {
    const auto ok = check_mass_layer(
        j, static_cast<int>(plan.groups[j].size()),
        [&](int /*t*/, int member) { return plan.copies[j][member].orig; },
        [&](int t) {
          return plan.copies[j][plan.groups[j][t].front()].category.direction;
        },
        [&](int t) -> const std::vector<int>& { return plan.groups[j][t]; });
    if (!ok) return false;
  }
  {
    std::vector<int> head_self = {-1};
    const auto ok = check_mass_layer(
        hidden, static_cast<int>(plan.heads.size()),
        [&](int t, int /*member*/) { return plan.heads[t].orig; },
        [&](int t) { return plan.heads[t].direction; },
        [&](int /*t*/) -> const std::vector<int>& { return head_self; });
    if (!ok) return false;
  }

  // Sampled bound check over the input box.
  std::mt19937_64 rng(0x5eedab52u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < 1000; ++s) {
    Eigen::VectorXd x(box.dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x[i] = box.lo()[i] + unit(rng) * (box.hi()[i] - box.lo()[i]);
    }
    const double fx = f_prime.eval(x)[0];
    const Eigen::VectorXd ax = abs.network.eval(x);
    const double tol = 1e-9 * (1.0 + std::abs(fx));
    for (std::size_t t = 0; t < plan.heads.size(); ++t) {
      const bool ok = plan.heads[t].direction == Direction::Inc
                          ? ax[static_cast<Eigen::Index>(t)] >= fx - tol
                          : ax[static_cast<Eigen::Index>(t)] <= fx + tol;
      if (!ok) {
        return ctx.fail("sampled bound check failed");
      }
    }
  }
  return true;
}

CheckResult verify_via_abstraction(const AbstractNetwork& abs,
                                   const Box& d_out, const Budget& budget,
                                   const CheckerConfig& config,
                                   const Network* source) {
  if (d_out.dim() != 1) {
    throw std::invalid_argument("verify_via_abstraction: d_out must match "
                                "the scalar source output");
  }
  const auto start = std::chrono::steady_clock::now();
  CheckResult result;
  result.witness_from_layer = 1;

  // Per head only one side of d_out binds: Inc heads must stay below the
  // upper side, Dec heads above the lower one. The other side is padded
  // from the head's own interval bound so a single containment query makes
  // the decision.
  Box chain = abs.d_in;
  for (const Layer& layer : abs.network.layers()) {
    chain = propagate_box(layer, chain);
  }
  const int heads = static_cast<int>(abs.plan.heads.size());
  Eigen::VectorXd lo(heads), hi(heads);
  for (int t = 0; t < heads; ++t) {
    const OutputHead& head = abs.plan.heads[t];
    if (head.direction == Direction::Inc) {
      lo[t] = chain.lo()[t] - 1.0 - config.sound_margin;
      hi[t] = d_out.hi()[head.orig];
    } else {
      lo[t] = d_out.lo()[head.orig];
      hi[t] = chain.hi()[t] + 1.0 + config.sound_margin;
    }
  }

  const int n = abs.network.num_layers();
  CheckResult inner = check_containment(
      ContainmentQuery{abs.network, 1, n, abs.d_in, Box(lo, hi)}, budget,
      config);
  result.stats = inner.stats;

  std::optional<Eigen::VectorXd> abstract_witness = std::move(inner.witness);
  if (inner.proven()) {
    result.verdict = Verdict::Proven;
  } else if (abstract_witness) {
    // The abstraction violates the property. For the concrete network this
    // is only conclusive if the witness violates in person.
    result.witness = abstract_witness;
    if (source) {
      Eigen::VectorXd y = source->eval(*abstract_witness);
      bool concrete = false;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] < d_out.lo()[i] || y[i] > d_out.hi()[i]) concrete = true;
      }
      if (concrete) {
        result.verdict = Verdict::Refuted;
      } else {
        result.verdict = Verdict::Unknown;
        result.spurious = true;
        result.note = "abstract counterexample is spurious";
      }
    } else {
      result.verdict = Verdict::Unknown;
      result.note = "abstract counterexample; source network not available";
    }
  } else {
    result.verdict = Verdict::Unknown;
    result.note = "abstraction bound budget exhausted";
  }
  result.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

namespace {

json category_to_json(const NeuronCategory& c) {
  return json{{"sign", c.sign == SignClass::Pos ? "pos" : "neg"},
              {"direction", c.direction == Direction::Inc ? "inc" : "dec"}};
}

NeuronCategory category_from_json(const json& j) {
  NeuronCategory c;
  c.sign = j.at("sign").get<std::string>() == "pos" ? SignClass::Pos
                                                    : SignClass::Neg;
  c.direction = j.at("direction").get<std::string>() == "inc"
                    ? Direction::Inc
                    : Direction::Dec;
  return c;
}

}  // namespace

json abstract_network_to_json(const AbstractNetwork& abs) {
  json doc;
  doc["network"] = network_to_json(abs.network);
  doc["margin"] = abs.margin;
  doc["source_hash"] = abs.source_hash;
  doc["d_in"] = box_to_json(abs.d_in);
  json plan;
  plan["input_dim"] = abs.plan.input_dim;
  plan["source_widths"] = abs.plan.source_widths;
  json copies = json::array();
  for (const auto& layer : abs.plan.copies) {
    json jl = json::array();
    for (const NeuronCopy& c : layer) {
      jl.push_back(json{{"orig", c.orig}, {"category", category_to_json(c.category)}});
    }
    copies.push_back(std::move(jl));
  }
  plan["copies"] = std::move(copies);
  plan["groups"] = abs.plan.groups;
  json routes = json::array();
  for (const Eigen::MatrixXi& r : abs.plan.routes) {
    json jr = json::array();
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index c = 0; c < r.cols(); ++c) row.push_back(r(i, c));
      jr.push_back(std::move(row));
    }
    routes.push_back(std::move(jr));
  }
  plan["routes"] = std::move(routes);
  json heads = json::array();
  for (const OutputHead& h : abs.plan.heads) {
    heads.push_back(json{
        {"orig", h.orig},
        {"direction", h.direction == Direction::Inc ? "inc" : "dec"}});
  }
  plan["heads"] = std::move(heads);
  doc["plan"] = std::move(plan);
  return doc;
}

AbstractNetwork abstract_network_from_json(const json& doc,
                                           const std::string& where) {
  AbstractNetwork abs;
  abs.network = network_from_json(doc.at("network"), where + ".network");
  abs.margin = doc.at("margin").get<double>();
  abs.source_hash = doc.at("source_hash").get<std::string>();
  abs.d_in = box_from_json(doc.at("d_in"), where + ".d_in");
  const json& plan = doc.at("plan");
  abs.plan.input_dim = plan.at("input_dim").get<Eigen::Index>();
  abs.plan.source_widths =
      plan.at("source_widths").get<std::vector<Eigen::Index>>();
  for (const json& jl : plan.at("copies")) {
    std::vector<NeuronCopy> layer;
    for (const json& jc : jl) {
      layer.push_back(NeuronCopy{jc.at("orig").get<int>(),
                                 category_from_json(jc.at("category"))});
    }
    abs.plan.copies.push_back(std::move(layer));
  }
  abs.plan.groups =
      plan.at("groups").get<std::vector<std::vector<std::vector<int>>>>();
  for (const json& jr : plan.at("routes")) {
    const Eigen::Index rows = static_cast<Eigen::Index>(jr.size());
    const Eigen::Index cols =
        rows > 0 ? static_cast<Eigen::Index>(jr.at(0).size()) : 0;
    Eigen::MatrixXi r(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        r(i, c) = jr.at(i).at(c).get<int>();
      }
    }
    abs.plan.routes.push_back(std::move(r));
  }
  for (const json& jh : plan.at("heads")) {
    abs.plan.heads.push_back(OutputHead{
        jh.at("orig").get<int>(),
        jh.at("direction").get<std::string>() == "inc" ? Direction::Inc
                                                       : Direction::Dec});
  }
  return abs;
}

}  // namespace relucert
