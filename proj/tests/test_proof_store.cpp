#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "relucert/digest.hpp"
#include "relucert/proof_store.hpp"
#include "relucert/reuse_engine.hpp"
#include "test_support.hpp"

using namespace relucert;
using namespace relucert::testing;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

ProofArtifact demo_artifact(double padding = 0.0) {
  const Network net = demo_net();
  const Box d_in = Box::uniform(2, -1, 1);
  const Box d_out(vec({0.0}), vec({12.0}));
  ProofArtifact artifact;
  artifact.network_hash = network_digest(net);
  artifact.problem_hash = problem_digest(net, d_in, d_out);
  artifact.d_out = d_out;
  artifact.state_abs =
      build_state_abstraction(net, d_in, AbstractionMode::Box, padding);
  artifact.state_abs.network_hash = artifact.network_hash;
  artifact.lipschitz = lipschitz_upper_bound(net, Norm::Linf);
  artifact.tool_version = "test";
  artifact.timings["verify_full"] = 0.001;
  return artifact;
}

}  // namespace

TEST_CASE("artifacts round-trip through the file format") {
  ProofArtifact artifact = demo_artifact();
  artifact.net_abs = abstract_network(demo_net(), artifact.d_in(), 4, 1e-3);
  const auto path = temp_file("relucert_artifact_roundtrip.json");
  save_artifact(artifact, path.string());
  const ProofArtifact loaded = load_artifact(path.string());

  CHECK(loaded.problem_hash == artifact.problem_hash);
  CHECK(loaded.network_hash == artifact.network_hash);
  CHECK(loaded.d_out == artifact.d_out);
  REQUIRE(loaded.state_abs.boxes.size() == artifact.state_abs.boxes.size());
  for (std::size_t k = 0; k < loaded.state_abs.boxes.size(); ++k) {
    CHECK(loaded.state_abs.boxes[k] == artifact.state_abs.boxes[k]);
  }
  CHECK(loaded.state_abs.input_box == artifact.state_abs.input_box);
  CHECK(loaded.state_abs.chain_consistent ==
        artifact.state_abs.chain_consistent);
  REQUIRE(loaded.lipschitz.has_value());
  CHECK(loaded.lipschitz->value == artifact.lipschitz->value);
  CHECK(loaded.lipschitz->norm == artifact.lipschitz->norm);
  REQUIRE(loaded.net_abs.has_value());
  CHECK(loaded.net_abs->source_hash == artifact.net_abs->source_hash);
  CHECK(loaded.net_abs->margin == artifact.net_abs->margin);
  for (int k = 0; k < loaded.net_abs->network.num_layers(); ++k) {
    CHECK(loaded.net_abs->network.layers()[k].weights ==
          artifact.net_abs->network.layers()[k].weights);
  }
  CHECK(loaded.net_abs->plan.groups == artifact.net_abs->plan.groups);
  CHECK(loaded.timings.at("verify_full") == 0.001);
  std::filesystem::remove(path);
}

TEST_CASE("artifacts whose output abstraction leaks past d_out are rejected") {
  ProofArtifact artifact = demo_artifact();
  artifact.d_out = Box(vec({0.0}), vec({11.0}));  // chain reaches 12
  const auto path = temp_file("relucert_artifact_bad_out.json");
  CHECK_THROWS_AS(save_artifact(artifact, path.string()), std::runtime_error);

  // Write a tampered file by hand: valid artifact, then shrink d_out.
  ProofArtifact good = demo_artifact();
  save_artifact(good, path.string());
  std::ifstream in(path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  in.close();
  const auto pos = text.find("12.0");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 4, "11.0");
  std::ofstream(path.string()) << text;
  CHECK_THROWS_AS(load_artifact(path.string()), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("corrupt artifact files are rejected") {
  const auto path = temp_file("relucert_artifact_corrupt.json");
  std::ofstream(path.string()) << "{ not json";
  CHECK_THROWS_AS(load_artifact(path.string()), std::runtime_error);
  std::ofstream(path.string()) << R"({"format": 99})";
  CHECK_THROWS_AS(load_artifact(path.string()), std::runtime_error);
  CHECK_THROWS_AS(load_artifact("/nonexistent/artifact.json"),
                  std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("applicability classifies the change kinds") {
  const Network net = demo_net();
  const ProofArtifact artifact = demo_artifact();
  const Box d_in = Box::uniform(2, -1, 1);
  const Box d_out(vec({0.0}), vec({12.0}));

  SUBCASE("identical problem is already proven") {
    const auto app =
        artifact_applicability(artifact, VerificationProblem(net, d_in, d_out));
    CHECK(app.change == ProblemChange::None);
    CHECK(app.mechanisms.empty());
  }
  SUBCASE("a shrunk domain is covered by the stored proof") {
    const auto app = artifact_applicability(
        artifact, VerificationProblem(net, Box::uniform(2, -0.5, 0.5), d_out));
    CHECK(app.change == ProblemChange::None);
  }
  SUBCASE("an enlarged domain routes to the domain-change mechanisms") {
    const auto app = artifact_applicability(
        artifact, VerificationProblem(net, Box::uniform(2, -1, 1.1), d_out));
    CHECK(app.change == ProblemChange::DomainEnlarged);
    CHECK(app.mechanisms == std::set<Mechanism>{Mechanism::LipschitzWiden,
                                                Mechanism::EarlyLayers,
                                                Mechanism::LayerReentry});
    CHECK(app.enlarged == Box::uniform(2, -1, 1.1));
  }
  SUBCASE("a changed network routes to the transfer mechanisms") {
    const Network tuned = perturb(net, 1e-4, 3);
    const auto app = artifact_applicability(
        artifact, VerificationProblem(tuned, d_in, d_out));
    CHECK(app.change == ProblemChange::NetworkChanged);
    CHECK(app.mechanisms.count(Mechanism::PerLayerTransfer) == 1);
    CHECK(app.mechanisms.count(Mechanism::SegmentedTransfer) == 1);
    CHECK(app.mechanisms.count(Mechanism::LocalRepair) == 1);
    // No network abstraction stored, so abstraction reuse is not offered.
    CHECK(app.mechanisms.count(Mechanism::AbstractionReuse) == 0);
  }
  SUBCASE("a changed output set disables every mechanism") {
    const auto app = artifact_applicability(
        artifact,
        VerificationProblem(net, d_in, Box(vec({0.0}), vec({13.0}))));
    CHECK(app.change == ProblemChange::OutputChanged);
    CHECK(app.mechanisms.empty());
  }
  SUBCASE("dimension mismatches are errors") {
    std::mt19937_64 rng(61);
    const Network other = random_net({3, 1}, 3, rng);
    CHECK_THROWS_AS(
        artifact_applicability(
            artifact, VerificationProblem(other, Box::uniform(3, -1, 1),
                                          Box::uniform(1, -5, 25))),
        std::invalid_argument);
  }
}

TEST_CASE("a stale net_abs hash disables abstraction reuse with a warning") {
  const Network net = demo_net();
  ProofArtifact artifact = demo_artifact();
  artifact.net_abs = abstract_network(net, artifact.d_in(), 4, 1e-3);
  artifact.net_abs->source_hash = "deadbeef";
  const Network tuned = perturb(net, 1e-5, 5);
  const auto app = artifact_applicability(
      artifact, VerificationProblem(tuned, artifact.d_in(), artifact.d_out));
  CHECK(app.mechanisms.count(Mechanism::AbstractionReuse) == 0);
  CHECK(app.mechanisms.count(Mechanism::PerLayerTransfer) == 1);
  CHECK_FALSE(app.warnings.empty());
}

TEST_CASE("rejected artifacts never reach the reuse engine") {
  // Fault injection: a tampered chain box must fail load, and reverify on a
  // manually corrupted in-memory artifact must refuse mismatched shapes.
  const auto path = temp_file("relucert_artifact_fault.json");
  ProofArtifact good = demo_artifact();
  save_artifact(good, path.string());

  std::ifstream in(path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  in.close();
  // Break the stored box invariant lo <= hi.
  const auto pos = text.find("\"lo\"");
  REQUIRE(pos != std::string::npos);
  std::string broken = text;
  broken.replace(pos, 4, "\"LO\"");
  std::ofstream(path.string()) << broken;
  CHECK_THROWS(load_artifact(path.string()));
  std::filesystem::remove(path);
}

TEST_CASE("digests are canonical and content-sensitive") {
  const Network net = demo_net();
  CHECK(network_digest(net).size() == 64);
  CHECK(network_digest(net) == network_digest(demo_net()));
  CHECK(network_digest(net) != network_digest(perturb(net, 1e-9, 1)));
  const Box a = Box::uniform(2, -1, 1);
  const Box b = Box::uniform(1, 0, 12);
  CHECK(problem_digest(net, a, b) == problem_digest(net, a, b));
  CHECK(problem_digest(net, a, b) !=
        problem_digest(net, Box::uniform(2, -1, 1.1), b));
}
