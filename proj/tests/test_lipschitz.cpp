#include <doctest.h>

#include <cmath>

#include "relucert/lipschitz.hpp"
#include "test_support.hpp"

using namespace relucert;
using namespace relucert::testing;

TEST_CASE("norm products on the demo net") {
  const Network net = demo_net();
  // Row abs-sums: layer 1 max(3,3,2)=3, layer 2 |2|+|2|+|-1|=5.
  CHECK(lipschitz_upper_bound(net, Norm::Linf).value ==
        doctest::Approx(15.0).epsilon(1e-12));
  // Column abs-sums: layer 1 max(1+2+1, 2+1+1)=4, layer 2 max=2.
  CHECK(lipschitz_upper_bound(net, Norm::L1).value ==
        doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("zero network has a zero bound") {
  Layer z{Eigen::MatrixXd::Zero(2, 3), Eigen::VectorXd::Zero(2),
          Activation::ReLU};
  const Network net({z}, 3);
  for (Norm n : {Norm::L1, Norm::L2, Norm::Linf}) {
    CHECK(lipschitz_upper_bound(net, n).value == 0.0);
  }
}

TEST_CASE("spectral estimate of a rotation sits in the inflation band") {
  const double a = 0.6;  // rotation by acos(0.6)
  const double b = std::sqrt(1.0 - a * a);
  Layer rot{mat({{a, -b}, {b, a}}), Eigen::VectorXd::Zero(2),
            Activation::Identity};
  const Network net({rot}, 2);
  const double ell = lipschitz_upper_bound(net, Norm::L2).value;
  CHECK(ell > 1.0);
  CHECK(ell <= 1.02);
}

TEST_CASE("sampled Lipschitz inequality holds across nets and norms") {
  std::mt19937_64 rng(41);
  const Box box = Box::uniform(3, -2, 2);
  for (int trial = 0; trial < 5; ++trial) {
    const Network net = random_net({8, 8, 2}, 3, rng, 1.3);
    for (Norm norm : {Norm::L1, Norm::L2, Norm::Linf}) {
      const double ell = lipschitz_upper_bound(net, norm).value;
      for (int s = 0; s < 1000; ++s) {
        const Eigen::VectorXd x1 = sample_box(box, rng);
        const Eigen::VectorXd x2 = sample_box(box, rng);
        const Eigen::VectorXd dy = net.eval(x1) - net.eval(x2);
        const Eigen::VectorXd dx = x1 - x2;
        auto nrm = [&](const Eigen::VectorXd& v) {
          switch (norm) {
            case Norm::L1: return v.cwiseAbs().sum();
            case Norm::L2: return v.norm();
            default: return v.cwiseAbs().maxCoeff();
          }
        };
        REQUIRE(nrm(dy) <= ell * nrm(dx) + 1e-9);
      }
    }
  }
}

TEST_CASE("kappa reproduces the worked enlargement distances") {
  SUBCASE("euclidean excess of 0.01 per side") {
    const double k = compute_kappa(Box::uniform(2, 1, 2),
                                   Box::uniform(2, 0.99, 2.01), Norm::L2);
    CHECK(k >= 0.01414);
    CHECK(k <= 0.01415);
  }
  SUBCASE("no enlargement means zero distance") {
    CHECK(compute_kappa(Box::uniform(3, -1, 1), Box::uniform(3, -1, 1),
                        Norm::L2) == 0.0);
  }
  SUBCASE("one-sided enlargement under the max norm") {
    CHECK(compute_kappa(Box::uniform(2, -1, 1), Box::uniform(2, -1, 1.1),
                        Norm::Linf) == doctest::Approx(0.1).epsilon(1e-12));
  }
  SUBCASE("base must sit inside enlarged") {
    CHECK_THROWS_AS(compute_kappa(Box::uniform(2, 0, 2), Box::uniform(2, 1, 3),
                                  Norm::L2),
                    std::invalid_argument);
  }
}

TEST_CASE("sampled points of the enlargement stay within kappa of the base") {
  std::mt19937_64 rng(42);
  const Box base = Box(vec({-1, 0.5}), vec({1, 2}));
  const Box enlarged = Box(vec({-1.3, 0.4}), vec({1.05, 2.2}));
  struct { Norm norm; double p; } cases[] = {
      {Norm::L1, 1.0}, {Norm::L2, 2.0}, {Norm::Linf, 0.0}};
  for (const auto& c : cases) {
    const double kappa = compute_kappa(base, enlarged, c.norm);
    int outside = 0;
    for (int s = 0; s < 1000; ++s) {
      const Eigen::VectorXd x = sample_box(enlarged, rng);
      if (base.contains_point(x)) continue;
      ++outside;
      REQUIRE(distance_to_box(x, base, c.p) <= kappa + 1e-12);
    }
    CHECK(outside > 0);
  }
}

TEST_CASE("output widening check reproduces the worked example") {
  const Box s_n(vec({1.0}), vec({8.0}));
  const Box d_out(vec({-10.0}), vec({10.0}));

  // ell*kappa = 2 widens [1,8] to [-1,10], inside [-10,10].
  CHECK(check_lipschitz_reuse(s_n, 100.0, 0.02, d_out));
  const Box widened = s_n.widened(100.0 * 0.02);
  CHECK(widened.lo()[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(widened.hi()[0] == doctest::Approx(10.0).epsilon(1e-12));

  // ell*kappa = 5 pushes the upper side to 13 > 10.
  CHECK_FALSE(check_lipschitz_reuse(s_n, 100.0, 0.05, d_out));
}

TEST_CASE("zero kappa reduces to plain containment") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd a(2), b(2), c(2), d(2);
    for (int i = 0; i < 2; ++i) {
      double x = u(rng), y = u(rng);
      a[i] = std::min(x, y);
      b[i] = std::max(x, y);
      x = u(rng), y = u(rng);
      c[i] = std::min(x, y);
      d[i] = std::max(x, y);
    }
    const Box s_n(a, b), d_out(c, d);
    CHECK(check_lipschitz_reuse(s_n, 123.0, 0.0, d_out) ==
          box_contains(d_out, s_n, 0.0));
  }
}

TEST_CASE("raising ell or kappa never turns false into true") {
  const Box s_n(vec({1.0}), vec({8.0}));
  const Box d_out(vec({-10.0}), vec({10.0}));
  bool prev = true;
  for (double k = 0.0; k <= 0.1; k += 0.005) {
    const bool now = check_lipschitz_reuse(s_n, 100.0, k, d_out);
    CHECK((prev || !now));  // once false, stays false as kappa grows
    prev = now;
  }
}
