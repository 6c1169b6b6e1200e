#include <doctest.h>

#include "relucert/abstraction.hpp"
#include "test_support.hpp"

using namespace relucert;
using namespace relucert::testing;

TEST_CASE("box transformer reproduces the demo net bounds") {
  const Network net = demo_net();

  const Box layer1 = propagate_box(net.layers()[0], Box::uniform(2, -1, 1));
  CHECK(layer1.lo() == vec({0, 0, 0}));
  CHECK(layer1.hi()[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(layer1.hi()[1] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(layer1.hi()[2] == doctest::Approx(2.0).epsilon(1e-12));

  const Box layer2 = propagate_box(
      net.layers()[1], Box(vec({0, 0, 0}), vec({3.1, 3.1, 2.1})));
  CHECK(layer2.lo()[0] == 0.0);
  CHECK(layer2.hi()[0] == doctest::Approx(12.4).epsilon(1e-12));
}

TEST_CASE("box transformer keeps identity layers exact") {
  Layer id{Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3),
           Activation::Identity};
  const Box in(vec({-1, 0, 2}), vec({1, 5, 2}));
  const Box out = propagate_box(id, in);
  CHECK(out == in);
}

TEST_CASE("box transformer checks dimensions") {
  const Network net = demo_net();
  CHECK_THROWS_AS(propagate_box(net.layers()[0], Box::uniform(3, 0, 1)),
                  std::invalid_argument);
}

TEST_CASE("symbolic propagation rejects bad ranges and dimensions") {
  const Network net = demo_net();
  CHECK_THROWS_AS(propagate_symbolic(net, 2, 1, Box::uniform(3, 0, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(propagate_symbolic(net, 1, 3, Box::uniform(2, 0, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(propagate_symbolic(net, 1, 2, Box::uniform(5, 0, 1)),
                  std::invalid_argument);
}

TEST_CASE("state abstraction chain matches the demo bounds") {
  const Network net = demo_net();
  const StateAbstraction abs = build_state_abstraction(
      net, Box::uniform(2, -1, 1), AbstractionMode::Box);
  REQUIRE(abs.boxes.size() == 2);
  CHECK(abs.boxes[1].lo()[0] == 0.0);
  CHECK(abs.boxes[1].hi()[0] == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(abs.chain_consistent);
  CHECK(check_chain_consistency(net, abs.input_box, abs.boxes));
}

TEST_CASE("single identity layer abstraction is the affine image") {
  Layer l{mat({{2, 0}, {0, -1}}), vec({1, 1}), Activation::Identity};
  const Network net({l}, 2);
  const StateAbstraction abs = build_state_abstraction(
      net, Box(vec({-1, 0}), vec({1, 2})), AbstractionMode::Box);
  CHECK(abs.boxes[0].lo() == vec({-1, -1}));
  CHECK(abs.boxes[0].hi() == vec({3, 1}));
}

TEST_CASE("sampled activations stay inside the stored chain") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Network net = random_net({8, 8, 8, 2}, 3, rng);
    const Box d_in = Box::uniform(3, -1.5, 1.5);
    for (AbstractionMode mode :
         {AbstractionMode::Box, AbstractionMode::Symbolic}) {
      const StateAbstraction abs = build_state_abstraction(net, d_in, mode);
      for (int s = 0; s < 1000; ++s) {
        const Eigen::VectorXd x = sample_box(d_in, rng);
        Eigen::VectorXd v = x;
        for (int k = 1; k <= net.num_layers(); ++k) {
          v = net.layers()[k - 1].apply(v);
          REQUIRE(abs.boxes[k - 1].contains_point(v, 1e-9));
        }
      }
    }
  }
}

TEST_CASE("growing the input box never shrinks the chain") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const Network net = random_net({6, 5, 2}, 2, rng);
    const Box small = Box::uniform(2, -1, 1);
    const Box large = Box::uniform(2, -1.3, 1.2);
    const auto a = build_state_abstraction(net, small, AbstractionMode::Box);
    const auto b = build_state_abstraction(net, large, AbstractionMode::Box);
    for (std::size_t k = 0; k < a.boxes.size(); ++k) {
      CHECK(box_contains(b.boxes[k], a.boxes[k], 1e-12));
    }
  }
}

TEST_CASE("symbolic bounds are exact when no nonlinearity fires") {
  // Both layer-1 pre-activations stay positive on [1,2]^2, so the network
  // equals one affine map there. The oracle is interval arithmetic on the
  // hand-composed map: -x1 + 0.25 over [1,2]^2, i.e. [-1.75, -0.75].
  Layer r1{mat({{1, 1}, {2, 1}}), vec({0, 0}), Activation::ReLU};
  Layer l2{mat({{1, -1}}), vec({0.25}), Activation::Identity};
  const Network net({r1, l2}, 2);
  const Box in = Box::uniform(2, 1, 2);

  const SymBounds sym = propagate_symbolic(net, 1, 2, in);
  CHECK(sym.all_stable);
  CHECK(sym.output_box.lo()[0] == doctest::Approx(-1.75).epsilon(1e-12));
  CHECK(sym.output_box.hi()[0] == doctest::Approx(-0.75).epsilon(1e-12));

  // The chained interval bound is strictly looser here.
  const Box chained =
      propagate_box(l2, propagate_box(r1, in));
  CHECK(chained.lo()[0] < -3.7);
  CHECK(chained.hi()[0] > 1.2);
}

TEST_CASE("symbolic upper bound on the demo net does not exceed the box bound") {
  const Network net = demo_net();
  const SymBounds sym =
      propagate_symbolic(net, 1, 2, Box::uniform(2, -1, 1.1));
  CHECK(sym.output_box.hi()[0] <= 12.4 + 1e-12);
  CHECK(sym.output_box.lo()[0] >= 0.0);
}

TEST_CASE("sampled evaluations stay inside symbolic boxes") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const Network net = random_net({7, 6, 3}, 3, rng);
    const Box d_in = Box::uniform(3, -1, 1);
    const SymBounds sym = propagate_symbolic(net, 1, 3, d_in);
    for (int s = 0; s < 100; ++s) {
      const Eigen::VectorXd x = sample_box(d_in, rng);
      REQUIRE(sym.output_box.contains_point(net.eval(x), 1e-9));
    }
  }
}

TEST_CASE("symbolic-mode chains are never looser than box-mode chains") {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    const Network net = random_net({6, 6, 6, 2}, 2, rng);
    const Box d_in = Box::uniform(2, -1, 1);
    const auto sym = build_state_abstraction(net, d_in,
                                             AbstractionMode::Symbolic);
    const auto box = build_state_abstraction(net, d_in, AbstractionMode::Box);
    for (std::size_t k = 0; k < box.boxes.size(); ++k) {
      CHECK(box_contains(box.boxes[k], sym.boxes[k], 1e-12));
    }
    CHECK(sym.chain_consistent);
    CHECK(check_chain_consistency(net, d_in, sym.boxes, 1e-12));
  }
}

TEST_CASE("raw symbolic boxes beat the interval chain on deep nets") {
  // The checker relies on symbolic concretizations being tighter than the
  // layer-by-layer interval chain once correlations matter. A positive bias
  // keeps the first layer stably active so the affine forms survive it.
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> w1(-0.4, 0.4);
  std::uniform_real_distribution<double> wd(-0.15, 0.15);
  int strictly_tighter = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Layer> layers;
    for (int k = 0; k < 4; ++k) {
      const int rows = k == 3 ? 1 : 8;
      const int cols = k == 0 ? 2 : 8;
      Layer layer;
      layer.weights = Eigen::MatrixXd(rows, cols);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          layer.weights(r, c) = k == 0 ? w1(rng) : wd(rng);
        }
      }
      layer.bias = Eigen::VectorXd::Constant(rows, k == 0 ? 1.5 : 0.1);
      layer.activation = k == 3 ? Activation::Identity : Activation::ReLU;
      layers.push_back(std::move(layer));
    }
    const Network net(std::move(layers), 2);
    const Box d_in = Box::uniform(2, -1, 1);
    const SymBounds sym = propagate_symbolic(net, 1, 4, d_in);
    const auto chain = build_state_abstraction(net, d_in, AbstractionMode::Box);
    CHECK(box_contains(chain.output_box(), sym.output_box, 1e-9));
    if (sym.output_box.hi()[0] < chain.output_box().hi()[0] - 1e-9) {
      strictly_tighter++;
    }
  }
  CHECK(strictly_tighter > 0);
}

TEST_CASE("box containment facts from the worked bounds") {
  const Box s2(vec({0.0}), vec({12.0}));
  CHECK(box_contains(s2, Box(vec({0.0}), vec({6.2})), 0.0));
  CHECK(box_contains(s2, s2, 0.0));
  CHECK_FALSE(box_contains(s2, Box(vec({0.0}), vec({12.4})), 0.0));
}

TEST_CASE("box containment at zero slack is a partial order") {
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  auto random_box = [&] {
    Eigen::VectorXd a(3), b(3);
    for (int i = 0; i < 3; ++i) {
      const double x = unit(rng), y = unit(rng);
      a[i] = std::min(x, y);
      b[i] = std::max(x, y);
    }
    return Box(a, b);
  };
  for (int trial = 0; trial < 200; ++trial) {
    const Box a = random_box(), b = random_box(), c = random_box();
    CHECK(box_contains(a, a, 0.0));  // reflexive
    if (box_contains(a, b, 0.0) && box_contains(b, a, 0.0)) {
      CHECK(a == b);  // antisymmetric
    }
    if (box_contains(a, b, 0.0) && box_contains(b, c, 0.0)) {
      CHECK(box_contains(a, c, 0.0));  // transitive
    }
  }
  CHECK_THROWS_AS(box_contains(Box::uniform(2, 0, 1), Box::uniform(3, 0, 1), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(box_contains(Box::uniform(2, 0, 1), Box::uniform(2, 0, 1), -1.0),
                  std::invalid_argument);
}

TEST_CASE("degenerate point domains reduce to exact evaluation") {
  const Network net = demo_net();
  const Eigen::VectorXd x = vec({-1.0, 1.1});
  const auto abs =
      build_state_abstraction(net, Box::point(x), AbstractionMode::Box);
  const Eigen::VectorXd y = net.eval(x);
  CHECK(abs.output_box().lo()[0] == doctest::Approx(y[0]).epsilon(1e-12));
  CHECK(abs.output_box().hi()[0] == doctest::Approx(y[0]).epsilon(1e-12));
}
