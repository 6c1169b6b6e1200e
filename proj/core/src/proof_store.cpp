#include "relucert/proof_store.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "relucert/digest.hpp"

namespace relucert {

using nlohmann::json;

std::string to_string(Mechanism m) {
  switch (m) {
    case Mechanism::AlreadyProven: return "already-proven";
    case Mechanism::LipschitzWiden: return "lipschitz";
    case Mechanism::EarlyLayers: return "early-layers";
    case Mechanism::LayerReentry: return "reentry";
    case Mechanism::AbstractionReuse: return "abstraction";
    case Mechanism::PerLayerTransfer: return "per-layer";
    case Mechanism::SegmentedTransfer: return "segments";
    case Mechanism::LocalRepair: return "repair";
    case Mechanism::FullVerify: return "full";
  }
  return "full";
}

Mechanism mechanism_from_string(const std::string& s) {
  for (Mechanism m :
       {Mechanism::AlreadyProven, Mechanism::LipschitzWiden,
        Mechanism::EarlyLayers, Mechanism::LayerReentry,
        Mechanism::AbstractionReuse, Mechanism::PerLayerTransfer,
        Mechanism::SegmentedTransfer, Mechanism::LocalRepair,
        Mechanism::FullVerify}) {
    if (to_string(m) == s) return m;
  }
  throw std::invalid_argument("unknown mechanism \"" + s + "\"");
}

namespace {

json state_abs_to_json(const StateAbstraction& abs) {
  json doc;
  json boxes = json::array();
  for (const Box& b : abs.boxes) boxes.push_back(box_to_json(b));
  doc["boxes"] = std::move(boxes);
  doc["input_box"] = box_to_json(abs.input_box);
  doc["network_hash"] = abs.network_hash;
  doc["mode"] = to_string(abs.mode);
  doc["padding"] = abs.padding;
  doc["chain_consistent"] = abs.chain_consistent;
  return doc;
}

StateAbstraction state_abs_from_json(const json& doc, const std::string& where) {
  StateAbstraction abs;
  for (const json& jb : doc.at("boxes")) {
    abs.boxes.push_back(box_from_json(jb, where + ".boxes"));
  }
  abs.input_box = box_from_json(doc.at("input_box"), where + ".input_box");
  abs.network_hash = doc.at("network_hash").get<std::string>();
  abs.mode = abstraction_mode_from_string(doc.at("mode").get<std::string>());
  abs.padding = doc.at("padding").get<double>();
  abs.chain_consistent = doc.at("chain_consistent").get<bool>();
  return abs;
}

void validate_artifact(const ProofArtifact& artifact, const std::string& where) {
  if (artifact.state_abs.boxes.empty()) {
    throw std::runtime_error(where + ": artifact has no state abstraction");
  }
  // Every box already passed the lo <= hi / finite checks when constructed;
  // here we re-check the containments the proof stands on.
  if (artifact.state_abs.output_box().dim() != artifact.d_out.dim()) {
    throw std::runtime_error(where + ": output abstraction dimension " +
                             "does not match d_out");
  }
  if (!box_contains(artifact.d_out, artifact.state_abs.output_box(), 0.0)) {
    throw std::runtime_error(where + ": stored output abstraction is not "
                             "contained in d_out; artifact rejected");
  }
  if (artifact.lipschitz &&
      (!std::isfinite(artifact.lipschitz->value) ||
       artifact.lipschitz->value < 0.0)) {
    throw std::runtime_error(where + ": invalid Lipschitz bound");
  }
  // A net_abs whose source hash disagrees with the artifact's network is
  // stale; it only disables abstraction reuse (handled in applicability),
  // the per-layer mechanisms re-check everything and stay usable.
}

}  // namespace

void save_artifact(const ProofArtifact& artifact, const std::string& path) {
  validate_artifact(artifact, "save_artifact");
  json doc;
  doc["format"] = ProofArtifact::kFormat;
  doc["verdict"] = "proven";
  doc["tool_version"] = artifact.tool_version;
  doc["problem_hash"] = artifact.problem_hash;
  doc["network_hash"] = artifact.network_hash;
  doc["d_out"] = box_to_json(artifact.d_out);
  doc["state_abs"] = state_abs_to_json(artifact.state_abs);
  if (artifact.lipschitz) {
    doc["lipschitz"] = json{{"value", artifact.lipschitz->value},
                            {"norm", to_string(artifact.lipschitz->norm)},
                            {"method", artifact.lipschitz->method}};
  }
  if (artifact.net_abs) {
    doc["net_abs"] = abstract_network_to_json(*artifact.net_abs);
  }
  doc["timings"] = artifact.timings;

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) {
      throw std::runtime_error("cannot write artifact file: " + tmp);
    }
    out << doc.dump(2) << "\n";
    if (!out) {
      throw std::runtime_error("write failed: " + tmp);
    }
  }
  std::filesystem::rename(tmp, path);
}

ProofArtifact load_artifact(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open artifact file: " + path);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("parse error in " + path + ": " + e.what());
  }
  ProofArtifact artifact;
  try {
    if (doc.at("format").get<int>() != ProofArtifact::kFormat) {
      throw std::runtime_error("unsupported artifact format");
    }
    if (doc.at("verdict").get<std::string>() != "proven") {
      throw std::runtime_error("artifact does not record a proven verdict");
    }
    artifact.tool_version = doc.at("tool_version").get<std::string>();
    artifact.problem_hash = doc.at("problem_hash").get<std::string>();
    artifact.network_hash = doc.at("network_hash").get<std::string>();
    artifact.d_out = box_from_json(doc.at("d_out"), path + ".d_out");
    artifact.state_abs = state_abs_from_json(doc.at("state_abs"),
                                             path + ".state_abs");
    if (doc.contains("lipschitz")) {
      const json& jl = doc.at("lipschitz");
      artifact.lipschitz = LipschitzBound{
          jl.at("value").get<double>(),
          norm_from_string(jl.at("norm").get<std::string>()),
          jl.at("method").get<std::string>()};
    }
    if (doc.contains("net_abs")) {
      artifact.net_abs =
          abstract_network_from_json(doc.at("net_abs"), path + ".net_abs");
    }
    artifact.timings =
        doc.at("timings").get<std::map<std::string, double>>();
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed artifact in " + path + ": " +
                             e.what());
  }
  validate_artifact(artifact, path);
  return artifact;
}

Applicability artifact_applicability(const ProofArtifact& artifact,
                                     const VerificationProblem& problem) {
  if (problem.d_in.dim() != artifact.d_in().dim()) {
    throw std::invalid_argument("artifact_applicability: d_in dimension "
                                "mismatch between artifact and problem");
  }
  if (problem.d_out.dim() != artifact.d_out.dim()) {
    throw std::invalid_argument("artifact_applicability: d_out dimension "
                                "mismatch between artifact and problem");
  }

  Applicability result;
  result.enlarged = artifact.d_in().hull(problem.d_in);

  if (!(problem.d_out == artifact.d_out)) {
    // No stored fact survives a change of the safe output set.
    result.change = ProblemChange::OutputChanged;
    return result;
  }

  const std::string new_hash = network_digest(problem.network);
  const bool same_network = new_hash == artifact.network_hash;
  const bool domain_covered = box_contains(artifact.d_in(), problem.d_in, 0.0);

  if (same_network) {
    if (domain_covered) {
      result.change = ProblemChange::None;
      return result;
    }
    result.change = ProblemChange::DomainEnlarged;
    result.mechanisms = {Mechanism::LipschitzWiden, Mechanism::EarlyLayers,
                         Mechanism::LayerReentry};
    if (!artifact.lipschitz) {
      result.mechanisms.erase(Mechanism::LipschitzWiden);
      result.warnings.push_back("artifact stores no Lipschitz bound");
    }
    if (!artifact.state_abs.chain_consistent) {
      result.mechanisms.erase(Mechanism::EarlyLayers);
      result.mechanisms.erase(Mechanism::LayerReentry);
      result.warnings.push_back(
          "stored state abstraction is not a consistent chain; "
          "layer-local reuse of the unchanged network is disabled");
    }
    return result;
  }

  result.change = ProblemChange::NetworkChanged;
  // Per-layer and segmented transfer re-prove every containment against the
  // modified network, so they remain sound even for a stale chain.
  result.mechanisms = {Mechanism::PerLayerTransfer,
                       Mechanism::SegmentedTransfer, Mechanism::LocalRepair};
  if (!artifact.net_abs) {
    result.warnings.push_back("artifact stores no network abstraction");
  } else if (artifact.net_abs->source_hash != artifact.network_hash) {
    result.warnings.push_back(
        "network abstraction was derived from a different network than the "
        "artifact records; abstraction reuse disabled, per-layer mechanisms "
        "re-check everything against the new network");
  } else {
    result.mechanisms.insert(Mechanism::AbstractionReuse);
  }
  return result;
}

}  // namespace relucert
