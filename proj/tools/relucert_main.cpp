// Command-line front end: verify a network against a box property,
// re-verify a modified problem against a stored proof artifact, inspect
// artifacts, and run the savings benchmark.

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <nlohmann/json.hpp>

#include "relucert/bench_harness.hpp"
#include "relucert/digest.hpp"
#include "relucert/reuse_engine.hpp"

#ifndef RELUCERT_TOOL_VERSION
#define RELUCERT_TOOL_VERSION "0.1.0"
#endif

namespace {

using namespace relucert;

constexpr int kExitProven = 0;
constexpr int kExitRefuted = 1;
constexpr int kExitUnknown = 2;
constexpr int kExitUsage = 64;
constexpr int kExitIo = 66;

/// Boxes on the command line are JSON arrays of [lo, hi] pairs, inline or
/// in a file referenced as @path.
Box parse_box(const std::string& text) {
  nlohmann::json doc;
  if (!text.empty() && text[0] == '@') {
    std::ifstream in(text.substr(1));
    if (!in) throw std::runtime_error("cannot open box file " + text.substr(1));
    doc = nlohmann::json::parse(in);
  } else {
    doc = nlohmann::json::parse(text);
  }
  if (!doc.is_array() || doc.empty()) {
    throw std::runtime_error("box must be a non-empty array of [lo, hi]");
  }
  Eigen::VectorXd lo(doc.size()), hi(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (!doc[i].is_array() || doc[i].size() != 2) {
      throw std::runtime_error("box entry " + std::to_string(i) +
                               " must be [lo, hi]");
    }
    lo[i] = doc[i][0].get<double>();
    hi[i] = doc[i][1].get<double>();
  }
  return Box(lo, hi);
}

struct CommonFlags {
  std::string mode = "symbolic";
  std::string norm = "linf";
  long budget_splits = 100000;
  double budget_time = 60.0;
  double min_box_width = 1e-9;
  double sound_margin = 0.0;
  int workers = 0;
  double padding = 0.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--mode", mode, "abstraction mode: box|symbolic")
        ->check(CLI::IsMember({"box", "symbolic"}));
    cmd->add_option("--norm", norm, "norm for Lipschitz/kappa: l1|l2|linf")
        ->check(CLI::IsMember({"l1", "l2", "linf"}));
    cmd->add_option("--budget-splits", budget_splits,
                    "max branch-and-bound splits per check");
    cmd->add_option("--budget-time", budget_time,
                    "max seconds per check");
    cmd->add_option("--min-box-width", min_box_width,
                    "stop splitting below this width");
    cmd->add_option("--sound-margin", sound_margin,
                    "extra containment margin required for proven verdicts");
    cmd->add_option("--workers", workers, "worker threads (0 = auto)");
    cmd->add_option("--padding", padding,
                    "outward padding of stored chain boxes");
  }

  Budget budget() const {
    Budget b;
    b.max_splits = budget_splits;
    b.max_time = std::chrono::duration<double>(budget_time);
    b.min_box_width = min_box_width;
    return b;
  }
  CheckerConfig checker() const {
    CheckerConfig c;
    c.sound_margin = sound_margin;
    c.workers = workers;
    return c;
  }
};

void print_witness(const Eigen::VectorXd& witness) {
  std::cout << "witness: [";
  for (Eigen::Index i = 0; i < witness.size(); ++i) {
    if (i) std::cout << ", ";
    std::cout << witness[i];
  }
  std::cout << "]\n";
}

int exit_code_for(Verdict v) {
  switch (v) {
    case Verdict::Proven: return kExitProven;
    case Verdict::Refuted: return kExitRefuted;
    case Verdict::Unknown: return kExitUnknown;
  }
  return kExitUnknown;
}

int run_verify(const std::string& network_path, const std::string& d_in_text,
               const std::string& d_out_text, const std::string& artifact_path,
               const CommonFlags& flags, bool with_net_abs, int net_abs_target,
               double net_abs_margin) {
  const Network net = load_network(network_path);
  const VerificationProblem problem(net, parse_box(d_in_text),
                                    parse_box(d_out_text));
  CertifyOptions opts;
  opts.mode = abstraction_mode_from_string(flags.mode);
  opts.padding = flags.padding;
  opts.norm = norm_from_string(flags.norm);
  if (with_net_abs) {
    opts.net_abs_target = net_abs_target;
    opts.net_abs_margin = net_abs_margin;
  }
  opts.budget = flags.budget();
  opts.checker = flags.checker();
  opts.tool_version = RELUCERT_TOOL_VERSION;

  const CertifyResult res = solve_and_certify(problem, opts);
  std::cout << "verdict: " << to_string(res.check.verdict) << "\n";
  std::cout << "splits: " << res.check.stats.splits
            << ", nodes: " << res.check.stats.nodes << ", time: "
            << res.timings.at("verify_full") << " s\n";
  for (const std::string& w : res.warnings) {
    std::cout << "warning: " << w << "\n";
  }
  if (res.check.refuted() && res.check.witness) {
    print_witness(*res.check.witness);
  }
  if (res.artifact && !artifact_path.empty()) {
    save_artifact(*res.artifact, artifact_path);
    std::cout << "artifact written to " << artifact_path << "\n";
  }
  return exit_code_for(res.check.verdict);
}

void write_reverify_report(const ReuseOutcome& outcome,
                           const ProofArtifact& artifact,
                           const std::string& path) {
  nlohmann::json doc;
  doc["verdict"] = to_string(outcome.verdict);
  if (outcome.mechanism) doc["mechanism"] = to_string(*outcome.mechanism);
  doc["reuse_wall_seconds"] = outcome.reuse_wall_seconds;
  doc["mechanism_seconds"] = outcome.mechanism_seconds;
  doc["max_subproblem_seconds"] = outcome.max_subproblem_seconds;
  doc["total_check_seconds"] = outcome.total_check_seconds;
  if (outcome.full_seconds > 0.0) {
    doc["full_seconds"] = outcome.full_seconds;
  }
  const auto it = artifact.timings.find("verify_full");
  if (it != artifact.timings.end() && it->second > 0.0) {
    doc["stored_full_seconds"] = it->second;
    doc["ratio_vs_stored_full"] = outcome.max_subproblem_seconds / it->second;
  }
  doc["warnings"] = outcome.warnings;
  nlohmann::json checks = nlohmann::json::array();
  for (const NamedCheck& nc : outcome.subproblem_stats) {
    checks.push_back(nlohmann::json{
        {"name", nc.name},
        {"verdict", to_string(nc.result.verdict)},
        {"note", nc.result.note},
        {"splits", nc.result.stats.splits},
        {"nodes", nc.result.stats.nodes},
        {"wall_seconds", nc.result.stats.wall_seconds}});
  }
  doc["checks"] = std::move(checks);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report file: " + path);
  out << doc.dump(2) << "\n";
}

int run_reverify(const std::string& network_path,
                 const std::string& artifact_path,
                 const std::string& new_d_in_text,
                 const std::string& new_d_out_text, const CommonFlags& flags,
                 const std::string& strategy_text,
                 const std::string& cuts_text, double kappa_override,
                 bool no_update, const std::string& report_path) {
  const Network net = load_network(network_path);
  const ProofArtifact artifact = load_artifact(artifact_path);
  const Box d_in = new_d_in_text.empty() ? artifact.d_in()
                                         : parse_box(new_d_in_text);
  const Box d_out = new_d_out_text.empty() ? artifact.d_out
                                           : parse_box(new_d_out_text);
  const VerificationProblem problem(net, d_in, d_out);

  ReuseConfig config;
  if (!strategy_text.empty()) config.strategy = parse_strategy(strategy_text);
  if (!cuts_text.empty()) {
    std::stringstream ss(cuts_text);
    std::string token;
    while (std::getline(ss, token, ',')) {
      config.cuts.push_back(std::stoi(token));
    }
  }
  if (kappa_override >= 0.0) config.kappa_override = kappa_override;
  config.checker = flags.checker();

  const ReuseOutcome outcome =
      reverify(problem, artifact, config, flags.budget());

  std::cout << "verdict: " << to_string(outcome.verdict) << "\n";
  if (outcome.mechanism) {
    std::cout << "mechanism: " << to_string(*outcome.mechanism) << "\n";
  }
  for (const std::string& w : outcome.warnings) {
    std::cout << "warning: " << w << "\n";
  }
  std::cout << "reuse time: " << outcome.reuse_wall_seconds << " s";
  if (outcome.max_subproblem_seconds > 0.0) {
    std::cout << " (largest subproblem " << outcome.max_subproblem_seconds
              << " s)";
  }
  std::cout << "\n";
  const auto it = artifact.timings.find("verify_full");
  if (it != artifact.timings.end() && it->second > 0.0 &&
      outcome.verdict == ReuseVerdict::ProvenByReuse &&
      outcome.mechanism != Mechanism::AlreadyProven) {
    std::cout << "ratio vs stored full verification: "
              << 100.0 * outcome.max_subproblem_seconds / it->second << "%\n";
  }
  if (outcome.full_seconds > 0.0) {
    std::cout << "fallback full verification: " << outcome.full_seconds
              << " s\n";
  }
  for (const NamedCheck& nc : outcome.subproblem_stats) {
    std::cout << "  check \"" << nc.name << "\": "
              << to_string(nc.result.verdict);
    if (!nc.result.note.empty()) std::cout << " (" << nc.result.note << ")";
    std::cout << "\n";
  }
  if (outcome.verdict == ReuseVerdict::Refuted) {
    for (const NamedCheck& nc : outcome.subproblem_stats) {
      if (nc.result.refuted() && nc.result.witness &&
          nc.result.witness_from_layer == 1) {
        print_witness(*nc.result.witness);
        break;
      }
    }
  }
  if (outcome.fresh_artifact && !no_update) {
    save_artifact(*outcome.fresh_artifact, artifact_path);
    std::cout << "artifact refreshed at " << artifact_path << "\n";
  }
  if (!report_path.empty()) {
    write_reverify_report(outcome, artifact, report_path);
    std::cout << "report written to " << report_path << "\n";
  }

  switch (outcome.verdict) {
    case ReuseVerdict::ProvenByReuse:
    case ReuseVerdict::ProvenByFallback:
      return kExitProven;
    case ReuseVerdict::Refuted:
      return kExitRefuted;
    case ReuseVerdict::Unknown:
      return kExitUnknown;
  }
  return kExitUnknown;
}

int run_inspect(const std::string& artifact_path) {
  const ProofArtifact artifact = load_artifact(artifact_path);
  std::cout << "format: " << ProofArtifact::kFormat << "\n";
  std::cout << "tool_version: " << artifact.tool_version << "\n";
  std::cout << "problem_hash: " << artifact.problem_hash << "\n";
  std::cout << "network_hash: " << artifact.network_hash << "\n";
  std::cout << "mode: " << to_string(artifact.state_abs.mode)
            << ", padding: " << artifact.state_abs.padding
            << ", chain_consistent: "
            << (artifact.state_abs.chain_consistent ? "yes" : "no") << "\n";
  std::cout << "layers: " << artifact.state_abs.boxes.size() << "\n";
  for (std::size_t k = 0; k < artifact.state_abs.boxes.size(); ++k) {
    const Box& b = artifact.state_abs.boxes[k];
    double log_volume = 0.0;
    for (Eigen::Index i = 0; i < b.dim(); ++i) {
      log_volume += std::log10(std::max(b.hi()[i] - b.lo()[i], 1e-300));
    }
    std::cout << "  S" << k + 1 << ": width " << b.dim()
              << ", log10 volume " << log_volume << "\n";
  }
  std::cout << "output abstraction inside d_out: "
            << (box_contains(artifact.d_out, artifact.state_abs.output_box(),
                             0.0)
                    ? "yes"
                    : "no")
            << "\n";
  if (artifact.lipschitz) {
    std::cout << "lipschitz: " << artifact.lipschitz->value << " ("
              << to_string(artifact.lipschitz->norm) << ", "
              << artifact.lipschitz->method << ")\n";
  }
  if (artifact.net_abs) {
    std::cout << "network abstraction: margin " << artifact.net_abs->margin
              << ", source " << artifact.net_abs->source_hash.substr(0, 12)
              << ", layer widths";
    for (int k = 1; k <= artifact.net_abs->network.num_layers(); ++k) {
      std::cout << " " << artifact.net_abs->network.layer_dim(k);
    }
    std::cout << "\n";
  }
  for (const auto& [phase, seconds] : artifact.timings) {
    std::cout << "timing " << phase << ": " << seconds << " s\n";
  }
  return kExitProven;
}

int run_bench_cmd(const BenchSpec& spec, const CommonFlags& flags,
                  const std::string& report_path, bool with_net_abs,
                  int net_abs_target, double net_abs_margin,
                  const std::string& strategy_text,
                  const std::string& cuts_text) {
  BenchOptions opts;
  opts.mode = abstraction_mode_from_string(flags.mode);
  opts.padding = flags.padding;
  opts.norm = norm_from_string(flags.norm);
  opts.with_net_abs = with_net_abs;
  opts.net_abs_target = net_abs_target;
  opts.net_abs_margin = net_abs_margin;
  opts.budget = flags.budget();
  opts.reuse.checker = flags.checker();
  if (!strategy_text.empty()) {
    opts.reuse.strategy = parse_strategy(strategy_text);
  }
  if (!cuts_text.empty()) {
    std::stringstream ss(cuts_text);
    std::string token;
    while (std::getline(ss, token, ',')) {
      opts.reuse.cuts.push_back(std::stoi(token));
    }
  }
  opts.tool_version = RELUCERT_TOOL_VERSION;

  const SavingsReport report = run_bench(spec, opts);
  std::cout << report_to_text(report);
  if (!report_path.empty()) {
    write_report(report, report_path);
    std::cout << "report written to " << report_path << "\n";
  }
  bool all_proven = true;
  for (const SavingsRow& row : report.rows) {
    all_proven &= row.verdict == ReuseVerdict::ProvenByReuse ||
                  row.verdict == ReuseVerdict::ProvenByFallback;
  }
  return all_proven ? kExitProven : kExitUnknown;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Box-safety verification of feed-forward ReLU networks with "
               "reusable proof artifacts"};
  app.set_version_flag("--version", RELUCERT_TOOL_VERSION);
  app.require_subcommand(1);

  // verify
  auto* verify_cmd =
      app.add_subcommand("verify", "verify a network and store the proof");
  std::string network_path, d_in_text, d_out_text, artifact_path;
  CommonFlags verify_flags;
  bool verify_net_abs = false;
  int verify_net_abs_target = 0;
  double verify_net_abs_margin = 1e-3;
  verify_cmd->add_option("network", network_path, "network file")->required();
  verify_cmd->add_option("--d-in", d_in_text,
                         "input box, JSON [[lo,hi],...] or @file")
      ->required();
  verify_cmd->add_option("--d-out", d_out_text, "safe output box")->required();
  verify_cmd->add_option("--artifact", artifact_path,
                         "write the proof artifact here");
  verify_cmd->add_flag("--net-abs", verify_net_abs,
                       "also build and store a merged network abstraction");
  verify_cmd->add_option("--net-abs-target", verify_net_abs_target,
                         "target neurons per layer for the abstraction "
                         "(0 keeps the sign-split network unmerged)");
  verify_cmd->add_option("--net-abs-margin", verify_net_abs_margin,
                         "dominance margin of the abstraction");
  verify_flags.attach(verify_cmd);

  // reverify
  auto* reverify_cmd = app.add_subcommand(
      "reverify", "re-certify a modified problem against a stored artifact");
  std::string re_network, re_artifact, re_d_in, re_d_out, strategy_text,
      cuts_text, re_report;
  double kappa_override = -1.0;
  bool no_update = false;
  CommonFlags reverify_flags;
  reverify_cmd->add_option("network", re_network, "network file (possibly "
                           "fine-tuned)")
      ->required();
  reverify_cmd->add_option("artifact", re_artifact, "stored proof artifact")
      ->required();
  reverify_cmd->add_option("--new-d-in", re_d_in,
                           "enlarged input box (defaults to the stored one)");
  reverify_cmd->add_option("--new-d-out", re_d_out,
                           "changed output box (forces full verification)");
  reverify_cmd->add_option("--strategy", strategy_text,
                           "comma list of mechanisms to try in order");
  reverify_cmd->add_option("--cuts", cuts_text,
                           "comma list of segment cut layers");
  reverify_cmd->add_option("--kappa", kappa_override,
                           "override the computed enlargement distance");
  reverify_cmd->add_flag("--no-update", no_update,
                         "do not refresh the artifact after a fallback proof");
  reverify_cmd->add_option("--report", re_report,
                           "write a JSON reverification report here");
  reverify_flags.attach(reverify_cmd);

  // inspect
  auto* inspect_cmd =
      app.add_subcommand("inspect", "print a stored artifact's contents");
  std::string inspect_path;
  inspect_cmd->add_option("artifact", inspect_path, "artifact file")
      ->required();

  // bench
  auto* bench_cmd = app.add_subcommand(
      "bench", "measure reuse savings on generated problem chains");
  BenchSpec spec;
  std::string report_path, bench_strategy, bench_cuts;
  bool bench_net_abs = false;
  int bench_net_abs_target = 0;
  double bench_net_abs_margin = 1e-3;
  CommonFlags bench_flags;
  bench_flags.padding = 0.01;
  bench_cmd->add_option("--layers", spec.layers, "layers in the base net");
  bench_cmd->add_option("--width", spec.width, "hidden width");
  bench_cmd->add_option("--input-dim", spec.input_dim, "input dimension");
  bench_cmd->add_option("--seed", spec.seed, "generator seed");
  bench_cmd->add_option("--n-variants", spec.n_variants,
                        "number of fine-tuned variants");
  bench_cmd->add_option("--perturb", spec.perturb_magnitude,
                        "fine-tuning magnitude");
  bench_cmd->add_option("--enlarge", spec.enlargement_fraction,
                        "relative domain enlargement");
  bench_cmd->add_option("--report", report_path, "write the JSON report here");
  bench_cmd->add_flag("--net-abs", bench_net_abs,
                      "store network abstractions in the artifacts");
  bench_cmd->add_option("--net-abs-target", bench_net_abs_target,
                        "abstraction target width (0 = unmerged)");
  bench_cmd->add_option("--net-abs-margin", bench_net_abs_margin,
                        "abstraction dominance margin");
  bench_cmd->add_option("--strategy", bench_strategy,
                        "mechanism order for the reuse runs");
  bench_cmd->add_option("--cuts", bench_cuts, "segment cut layers");
  bench_flags.attach(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*verify_cmd) {
      return run_verify(network_path, d_in_text, d_out_text, artifact_path,
                        verify_flags, verify_net_abs, verify_net_abs_target,
                        verify_net_abs_margin);
    }
    if (*reverify_cmd) {
      return run_reverify(re_network, re_artifact, re_d_in, re_d_out,
                          reverify_flags, strategy_text, cuts_text,
                          kappa_override, no_update, re_report);
    }
    if (*inspect_cmd) {
      return run_inspect(inspect_path);
    }
    if (*bench_cmd) {
      return run_bench_cmd(spec, bench_flags, report_path, bench_net_abs,
                           bench_net_abs_target, bench_net_abs_margin,
                           bench_strategy, bench_cuts);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
