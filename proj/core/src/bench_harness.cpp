#include "relucert/bench_harness.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <stdexcept>

#include "relucert/lipschitz.hpp"

namespace relucert {

using nlohmann::json;

Network random_mlp(int layers, int width, int input_dim, std::uint64_t seed,
                   double gain) {
  if (layers < 1 || width < 1 || input_dim < 1) {
    throw std::invalid_argument("random_mlp: layers, width, input_dim must "
                                "be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Layer> net_layers;
  int fan_in = input_dim;
  for (int k = 1; k <= layers; ++k) {
    const int fan_out = k == layers ? 1 : width;
    const double scale = gain * std::sqrt(3.0 / fan_in);
    Layer layer;
    layer.weights = Eigen::MatrixXd(fan_out, fan_in);
    layer.bias = Eigen::VectorXd(fan_out);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) {
        layer.weights(r, c) = scale * unit(rng);
      }
    }
    for (int r = 0; r < fan_out; ++r) {
      layer.bias[r] = 0.1 * unit(rng);
    }
    layer.activation = k == layers ? Activation::Identity : Activation::ReLU;
    net_layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  return Network(std::move(net_layers), input_dim,
                 "bench-mlp-" + std::to_string(seed), "1");
}

namespace {

double convention_seconds(const ReuseOutcome& outcome) {
  if (outcome.mechanism == Mechanism::PerLayerTransfer ||
      outcome.mechanism == Mechanism::SegmentedTransfer) {
    return outcome.max_subproblem_seconds;
  }
  return outcome.mechanism_seconds;
}

}  // namespace

SavingsReport run_bench(const BenchSpec& spec, const BenchOptions& options) {
  if (spec.layers < 2 || spec.width < 1 || spec.input_dim < 1 ||
      spec.n_variants < 0 || spec.perturb_magnitude < 0.0) {
    throw std::invalid_argument("bench spec: all sizes must be positive");
  }
  if (spec.enlargement_fraction <= 0.0 || spec.enlargement_fraction > 1.0) {
    throw std::invalid_argument("bench spec: enlargement_fraction must be "
                                "in (0, 1]");
  }

  SavingsReport report;
  report.spec = spec;
  report.notes.push_back(
      "baseline \"full\" column is this tool's own from-scratch "
      "verification, measured in the same process");
  report.notes.push_back(
      "fine-tune rows report the largest parallel subproblem as reuse time");

  const Network base = random_mlp(spec.layers, spec.width, spec.input_dim,
                                  spec.seed);
  const Box d_in = Box::uniform(spec.input_dim, -1.0, 1.0);

  // The safe output set is sized from the base chain so that both the
  // planned enlargement (via the Lipschitz bound) and small fine-tunings
  // (via the chain padding) stay provable; this mirrors generous regression
  // bounds around observed behaviour.
  StateAbstraction chain0 =
      build_state_abstraction(base, d_in, options.mode, options.padding);
  const LipschitzBound ell = lipschitz_upper_bound(base, options.norm);
  const double kappa_planned = spec.enlargement_fraction;  // halfwidth 1
  const Box& s_n = chain0.output_box();
  Eigen::VectorXd out_lo(s_n.dim());
  Eigen::VectorXd out_hi(s_n.dim());
  for (Eigen::Index i = 0; i < s_n.dim(); ++i) {
    const double slack = 0.5 * (s_n.hi()[i] - s_n.lo()[i]) +
                         1.25 * ell.value * kappa_planned + 0.05;
    out_lo[i] = s_n.lo()[i] - slack;
    out_hi[i] = s_n.hi()[i] + slack;
  }
  const Box d_out(out_lo, out_hi);

  CertifyOptions certify;
  certify.mode = options.mode;
  certify.padding = options.padding;
  certify.norm = options.norm;
  if (options.with_net_abs) {
    certify.net_abs_target = options.net_abs_target;
    certify.net_abs_margin = options.net_abs_margin;
  }
  certify.budget = options.budget;
  certify.checker = options.reuse.checker;
  certify.tool_version = options.tool_version;

  auto timed_certify = [&](const VerificationProblem& problem, double* seconds) {
    const auto t0 = std::chrono::steady_clock::now();
    CertifyResult r = solve_and_certify(problem, certify);
    *seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (!r.artifact) {
      throw std::runtime_error(
          "benchmark base problem could not be proven from scratch (" +
          to_string(r.check.verdict) + ")");
    }
    return std::move(*r.artifact);
  };

  double base_seconds = 0.0;
  ProofArtifact artifact = timed_certify(VerificationProblem(base, d_in, d_out),
                                         &base_seconds);
  report.notes.push_back("base problem certified from scratch in " +
                         std::to_string(base_seconds * 1e3) + " ms");

  // Domain-change case: same network over the enlarged input box.
  {
    Eigen::VectorXd lo = d_in.lo();
    Eigen::VectorXd hi = d_in.hi();
    const Eigen::VectorXd half = 0.5 * (hi - lo);
    const Eigen::VectorXd center = 0.5 * (hi + lo);
    const Eigen::VectorXd grow = (1.0 + spec.enlargement_fraction) * half;
    Box enlarged(center - grow, center + grow);
    VerificationProblem problem(base, enlarged, d_out);

    ReuseOutcome outcome = reverify(problem, artifact, options.reuse,
                                    options.budget);
    double full_seconds = 0.0;
    timed_certify(problem, &full_seconds);

    SavingsRow row;
    row.case_id = "domain-1";
    row.change_type = "domain-change";
    row.verdict = outcome.verdict;
    row.mechanism = outcome.mechanism.value_or(Mechanism::FullVerify);
    row.reuse_seconds = convention_seconds(outcome);
    row.full_seconds = full_seconds;
    row.ratio = full_seconds > 0.0 ? row.reuse_seconds / full_seconds : 0.0;
    report.rows.push_back(row);
  }

  // Fine-tune cases: each variant is tuned from the previous one and is
  // re-verified against the previous variant's artifact.
  Network current = base;
  for (int v = 1; v <= spec.n_variants; ++v) {
    current = perturb(current, spec.perturb_magnitude, spec.seed + v);
    VerificationProblem problem(current, d_in, d_out);

    ReuseOutcome outcome = reverify(problem, artifact, options.reuse,
                                    options.budget);
    double full_seconds = 0.0;
    ProofArtifact fresh = timed_certify(problem, &full_seconds);

    SavingsRow row;
    row.case_id = "tune-" + std::to_string(v);
    row.change_type = "fine-tune";
    row.verdict = outcome.verdict;
    row.mechanism = outcome.mechanism.value_or(Mechanism::FullVerify);
    row.reuse_seconds = convention_seconds(outcome);
    row.full_seconds = full_seconds;
    row.ratio = full_seconds > 0.0 ? row.reuse_seconds / full_seconds : 0.0;
    report.rows.push_back(row);

    artifact = std::move(fresh);
  }
  return report;
}

std::string report_to_text(const SavingsReport& report) {
  std::ostringstream os;
  os << "case         change         verdict            mechanism    "
     << "reuse [ms]   full [ms]   ratio\n";
  for (const SavingsRow& row : report.rows) {
    os << std::left << std::setw(13) << row.case_id << std::setw(15)
       << row.change_type << std::setw(19) << to_string(row.verdict)
       << std::setw(13) << to_string(row.mechanism) << std::right
       << std::setw(10) << std::fixed << std::setprecision(3)
       << row.reuse_seconds * 1e3 << std::setw(12)
       << row.full_seconds * 1e3 << std::setw(8) << std::setprecision(2)
       << row.ratio * 100.0 << "%\n";
  }
  for (const std::string& note : report.notes) {
    os << "# " << note << "\n";
  }
  return os.str();
}

json report_to_json(const SavingsReport& report) {
  json doc;
  doc["spec"] = json{{"layers", report.spec.layers},
                     {"width", report.spec.width},
                     {"input_dim", report.spec.input_dim},
                     {"seed", report.spec.seed},
                     {"n_variants", report.spec.n_variants},
                     {"perturb_magnitude", report.spec.perturb_magnitude},
                     {"enlargement_fraction", report.spec.enlargement_fraction}};
  json rows = json::array();
  for (const SavingsRow& row : report.rows) {
    rows.push_back(json{{"case", row.case_id},
                        {"change", row.change_type},
                        {"verdict", to_string(row.verdict)},
                        {"mechanism", to_string(row.mechanism)},
                        {"reuse_seconds", row.reuse_seconds},
                        {"full_seconds", row.full_seconds},
                        {"ratio", row.ratio}});
  }
  doc["rows"] = std::move(rows);
  doc["notes"] = report.notes;
  return doc;
}

void write_report(const SavingsReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write report file: " + path);
  }
  out << report_to_json(report).dump(2) << "\n";
}

}  // namespace relucert
