#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "relucert/network.hpp"
#include "relucert/reuse_engine.hpp"

namespace relucert {

/// Parameters of one benchmark run: a random base MLP, a chain of fine-tuned
/// variants, and one domain enlargement.
struct BenchSpec {
  int layers = 6;
  int width = 16;
  int input_dim = 4;
  std::uint64_t seed = 7;
  int n_variants = 4;
  double perturb_magnitude = 1e-4;
  double enlargement_fraction = 0.05;
};

struct BenchOptions {
  AbstractionMode mode = AbstractionMode::Symbolic;
  double padding = 0.01;
  Norm norm = Norm::Linf;
  bool with_net_abs = false;
  /// Target neurons per layer for the stored abstraction; <= 0 keeps the
  /// sign-split network unmerged (dominance margins only).
  int net_abs_target = 0;
  double net_abs_margin = 1e-3;
  Budget budget;
  ReuseConfig reuse;
  std::string tool_version;
};

struct SavingsRow {
  std::string case_id;
  std::string change_type;  // "domain-change" or "fine-tune"
  ReuseVerdict verdict = ReuseVerdict::Unknown;
  Mechanism mechanism = Mechanism::FullVerify;
  /// Reuse cost under the reporting convention: the largest parallel
  /// subproblem for the conjunctive mechanisms, the whole mechanism
  /// otherwise.
  double reuse_seconds = 0.0;
  double full_seconds = 0.0;
  double ratio = 0.0;  // reuse_seconds / full_seconds
};

struct SavingsReport {
  BenchSpec spec;
  std::vector<SavingsRow> rows;
  std::vector<std::string> notes;
};

/// Random fully-connected ReLU network with an identity regression head.
/// Weight scale follows 1/sqrt(fan_in) so activations stay bounded across
/// depth. Deterministic given the seed.
Network random_mlp(int layers, int width, int input_dim, std::uint64_t seed,
                   double gain = 0.7);

/// Generates the base problem plus variants, then for every case measures
/// both the reuse path and a from-scratch verification on the same machine
/// in the same run. Verdicts and mechanisms are deterministic given the
/// seed; wall times are not.
SavingsReport run_bench(const BenchSpec& spec, const BenchOptions& options);

std::string report_to_text(const SavingsReport& report);
nlohmann::json report_to_json(const SavingsReport& report);
void write_report(const SavingsReport& report, const std::string& path);

}  // namespace relucert
