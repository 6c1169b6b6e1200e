#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "relucert/digest.hpp"
#include "relucert/network.hpp"
#include "test_support.hpp"

using namespace relucert;
using namespace relucert::testing;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("eval matches the hand-computed demo net") {
  const Network net = demo_net();
  const Eigen::VectorXd y = net.eval(vec({-1.0, 1.1}));
  // n1 = relu(-1 - 2.2) = 0, n2 = relu(2 + 1.1) = 3.1, n3 = relu(-2.1) = 0
  // n4 = relu(2*0 + 2*3.1 - 0) = 6.2
  CHECK(y.size() == 1);
  CHECK(y[0] == doctest::Approx(6.2).epsilon(1e-12));

  const Eigen::VectorXd hidden = net.eval_range(1, 1, vec({-1.0, 1.1}));
  CHECK(hidden[0] == doctest::Approx(0.0));
  CHECK(hidden[1] == doctest::Approx(3.1));
  CHECK(hidden[2] == doctest::Approx(0.0));
}

TEST_CASE("zero network maps everything to zero") {
  Layer l{Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3),
          Activation::ReLU};
  const Network net({l}, 2);
  CHECK(net.eval(vec({4.2, -3.0})).isZero(0.0));
}

TEST_CASE("identity layer passes inputs through") {
  Layer l{Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2),
          Activation::Identity};
  const Network net({l}, 2);
  const Eigen::VectorXd y = net.eval(vec({3.0, -4.0}));
  CHECK(y[0] == 3.0);
  CHECK(y[1] == -4.0);
}

TEST_CASE("eval_range rejects empty and inverted ranges") {
  const Network net = demo_net();
  CHECK_THROWS_AS(net.eval_range(2, 1, vec({0.0, 0.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(net.eval_range(0, 1, vec({0.0, 0.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(net.eval_range(1, 3, vec({0.0, 0.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(net.eval(vec({1.0, 2.0, 3.0})), std::invalid_argument);
}

TEST_CASE("eval_range composes to eval at every split point") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Network net = random_net({5, 4, 3}, 3, rng);
    const Box box = Box::uniform(3, -2.0, 2.0);
    for (int s = 0; s < 5; ++s) {
      const Eigen::VectorXd x = sample_box(box, rng);
      const Eigen::VectorXd direct = net.eval(x);
      CHECK((net.eval_range(1, 3, x) - direct).cwiseAbs().maxCoeff() == 0.0);
      for (int split = 1; split < 3; ++split) {
        const Eigen::VectorXd mid = net.eval_range(1, split, x);
        const Eigen::VectorXd y = net.eval_range(split + 1, 3, mid);
        CHECK((y - direct).cwiseAbs().maxCoeff() == 0.0);
      }
    }
  }
}

TEST_CASE("evaluation is affine within a fixed activation region") {
  // Finite-difference linearity test around a point whose ReLU pattern is
  // stable in a small neighbourhood.
  std::mt19937_64 rng(12);
  const Network net = random_net({6, 6, 2}, 3, rng);
  const Eigen::VectorXd x0 = vec({0.31, -0.42, 0.17});
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
      Eigen::VectorXd e2 = Eigen::VectorXd::Zero(3);
      e1[i] = h;
      e2[j] = h;
      const Eigen::VectorXd mixed =
          net.eval(x0 + e1 + e2) - net.eval(x0 + e1) - net.eval(x0 + e2) +
          net.eval(x0);
      CHECK(mixed.cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("perturb: zero magnitude, determinism, bounded distance") {
  const Network net = demo_net();

  const Network same = perturb(net, 0.0, 42);
  for (int k = 0; k < net.num_layers(); ++k) {
    CHECK(same.layers()[k].weights == net.layers()[k].weights);
    CHECK(same.layers()[k].bias == net.layers()[k].bias);
  }

  const Network a = perturb(net, 1e-3, 7);
  const Network b = perturb(net, 1e-3, 7);
  const Network c = perturb(net, 1e-3, 8);
  bool all_equal_ab = true;
  bool any_diff_ac = false;
  double max_dist = 0.0;
  for (int k = 0; k < net.num_layers(); ++k) {
    all_equal_ab &= a.layers()[k].weights == b.layers()[k].weights;
    all_equal_ab &= a.layers()[k].bias == b.layers()[k].bias;
    any_diff_ac |= a.layers()[k].weights != c.layers()[k].weights;
    max_dist = std::max(
        max_dist, (a.layers()[k].weights - net.layers()[k].weights)
                      .cwiseAbs()
                      .maxCoeff());
    max_dist = std::max(
        max_dist,
        (a.layers()[k].bias - net.layers()[k].bias).cwiseAbs().maxCoeff());
  }
  CHECK(all_equal_ab);
  CHECK(any_diff_ac);
  CHECK(max_dist <= 1e-3);
  CHECK(max_dist > 0.0);
  CHECK_THROWS_AS(perturb(net, -1.0, 0), std::invalid_argument);
}

TEST_CASE("network files round-trip bit-identically") {
  const Network net = perturb(demo_net(), 0.125, 99);  // non-trivial digits
  const auto path = temp_file("relucert_net_roundtrip.json");
  save_network(net, path.string());
  const Network loaded = load_network(path.string());
  CHECK(loaded.name() == net.name());
  CHECK(loaded.input_dim() == net.input_dim());
  for (int k = 0; k < net.num_layers(); ++k) {
    CHECK(loaded.layers()[k].weights == net.layers()[k].weights);
    CHECK(loaded.layers()[k].bias == net.layers()[k].bias);
    CHECK(loaded.layers()[k].activation == net.layers()[k].activation);
  }
  CHECK(network_digest(loaded) == network_digest(net));
  std::filesystem::remove(path);
}

TEST_CASE("malformed network files are rejected with context") {
  const auto path = temp_file("relucert_net_bad.json");

  SUBCASE("non-finite weight") {
    std::ofstream(path.string())
        << R"({"name":"x","version":"1","input_dim":1,
             "layers":[{"weights":[["NaN"]],"bias":[0],"activation":"relu"}]})";
    CHECK_THROWS(load_network(path.string()));
  }
  SUBCASE("shape mismatch between layers") {
    std::ofstream(path.string())
        << R"({"name":"x","version":"1","input_dim":2,
             "layers":[{"weights":[[1,0],[0,1]],"bias":[0,0],"activation":"relu"},
                       {"weights":[[1,2,3]],"bias":[0],"activation":"relu"}]})";
    CHECK_THROWS_WITH_AS(load_network(path.string()),
                         doctest::Contains("layer 2"), std::invalid_argument);
  }
  SUBCASE("bias length mismatch") {
    std::ofstream(path.string())
        << R"({"name":"x","version":"1","input_dim":2,
             "layers":[{"weights":[[1,0],[0,1]],"bias":[0],"activation":"relu"}]})";
    CHECK_THROWS(load_network(path.string()));
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_network("/nonexistent/net.json"), std::runtime_error);
  }
  std::filesystem::remove(path);
}

TEST_CASE("hidden layers must be relu") {
  Layer l1{Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2),
           Activation::Identity};
  Layer l2{Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2),
           Activation::Identity};
  CHECK_THROWS_AS(Network({l1, l2}, 2), std::invalid_argument);
}
