#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "amm/distributions.hpp"
#include "amm/moments.hpp"
#include "amm/rng.hpp"
#include "test_util.hpp"

using namespace amm;
using testutil::grid_oracle_k2;
using testutil::random_separated_1d;

TEST_SUITE_BEGIN("moments");

TEST_CASE("moments_of closed forms") {
  {
    const auto m = moments_of(AtomicDistribution::from_1d({0.5}, {1.0}), 4);
    CHECK(m.values[0] == doctest::Approx(0.5));
    CHECK(m.values[1] == doctest::Approx(0.25));
    CHECK(m.values[2] == doctest::Approx(0.125));
    CHECK(m.values[3] == doctest::Approx(0.0625));
  }
  {
    const auto m =
        moments_of(AtomicDistribution::from_1d({-1.0, 1.0}, {0.5, 0.5}), 3);
    CHECK(m.values[0] == doctest::Approx(0.0));
    CHECK(m.values[1] == doctest::Approx(1.0));
    CHECK(m.values[2] == doctest::Approx(0.0));
  }
  {
    const auto m =
        moments_of(AtomicDistribution::from_1d({-0.5, 0.2}, {0.3, 0.7}), 2);
    CHECK(m.values[0] == doctest::Approx(0.3 * -0.5 + 0.7 * 0.2));
    CHECK(m.values[1] == doctest::Approx(0.3 * 0.25 + 0.7 * 0.04));
  }
}

TEST_CASE("projection is an exact fixed point on feasible input") {
  Rng rng(31);
  for (int k = 1; k <= 4; ++k) {
    for (int t = 0; t < 10; ++t) {
      const auto d = random_separated_1d(rng, k, 0.1, 0.05);
      const auto m = moments_of(d, 2 * k - 1);
      const auto p = project_to_moment_space(m, {-1.0, 1.0});
      for (int r = 0; r < m.order(); ++r)
        CHECK(p.values[r] == m.values[r]);  // bitwise: feasible short-circuit
    }
  }
}

TEST_CASE("projection clips k = 1 to the interval endpoint") {
  MomentVector m;
  m.values = {1.5};
  const auto p = project_to_moment_space(m, {-1.0, 1.0});
  CHECK(p.values[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("projection output is feasible and idempotent") {
  Rng rng(32);
  for (int t = 0; t < 12; ++t) {
    const auto d = random_separated_1d(rng, 2, 0.15, 0.1);
    auto m = moments_of(d, 3);
    for (auto& v : m.values) v += 0.01 * (2.0 * rng.next_double() - 1.0);
    const auto p = project_to_moment_space(m, {-1.0, 1.0});
    CHECK(moments_feasible(p, {-1.0, 1.0}, 1e-8));
    const auto p2 = project_to_moment_space(p, {-1.0, 1.0});
    double drift = 0.0;
    for (int r = 0; r < p.order(); ++r)
      drift = std::max(drift, std::abs(p.values[r] - p2.values[r]));
    CHECK(drift <= 1e-9);
  }
}

TEST_CASE("projection objective matches the grid oracle (k = 2)") {
  Rng rng(33);
  for (int t = 0; t < 10; ++t) {
    const auto d = random_separated_1d(rng, 2, 0.15, 0.1);
    auto m = moments_of(d, 3);
    // Perturb enough to leave the moment space on most draws.
    for (auto& v : m.values) v += 0.05 * (2.0 * rng.next_double() - 1.0);
    const auto p = project_to_moment_space(m, {-1.0, 1.0});
    double obj = 0.0;
    for (int r = 0; r < m.order(); ++r)
      obj += (m.values[r] - p.values[r]) * (m.values[r] - p.values[r]);
    obj = std::sqrt(obj);
    const double oracle = grid_oracle_k2(m.values);
    CHECK(std::abs(obj - oracle) <= 1e-4);
  }
}

TEST_CASE("projection rejects even order") {
  MomentVector m;
  m.values = {0.0, 1.0};
  CHECK_THROWS_AS(project_to_moment_space(m, {-1.0, 1.0}), InvalidArgument);
}

TEST_CASE("gauss_quadrature closed forms") {
  {
    MomentVector m;
    m.values = {0.0, 1.0, 0.0};
    const auto d = gauss_quadrature(m, 2);
    REQUIRE(d.k() == 2);
    CHECK(d.atoms(0, 0) == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(d.atoms(1, 0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(d.weights(0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(d.weights(1) == doctest::Approx(0.5).epsilon(1e-9));
  }
  {
    // Dirac moments collapse to a single atom.
    const double c = 0.37;
    MomentVector m;
    m.values = {c, c * c, c * c * c};
    const auto d = gauss_quadrature(m, 2);
    REQUIRE(d.k() == 1);
    CHECK(d.atoms(0, 0) == doctest::Approx(c).epsilon(1e-10));
    CHECK(d.weights(0) == doctest::Approx(1.0));
  }
}

TEST_CASE("quadrature round-trip recovers random mixtures") {
  Rng rng(34);
  for (int k = 1; k <= 4; ++k) {
    for (int t = 0; t < 20; ++t) {
      const auto d = random_separated_1d(rng, k, 0.1, 0.05);
      const auto m = moments_of(d, 2 * k - 1);
      const auto rec = gauss_quadrature(m, k, {{-1.0, 1.0}});
      CHECK(wasserstein1_1d(d, rec) <= 1e-6);
    }
  }
}

TEST_CASE("quadrature atoms stay inside the interval on projected moments") {
  Rng rng(35);
  for (int t = 0; t < 10; ++t) {
    const auto d = random_separated_1d(rng, 3, 0.1, 0.05);
    auto m = moments_of(d, 5);
    for (auto& v : m.values) v += 0.02 * (2.0 * rng.next_double() - 1.0);
    const auto p = project_to_moment_space(m, {-1.0, 1.0});
    const auto rec = gauss_quadrature(p, 3, {{-1.0, 1.0}});
    for (int i = 0; i < rec.k(); ++i) {
      CHECK(rec.atoms(i, 0) >= -1.0 - 1e-6);
      CHECK(rec.atoms(i, 0) <= 1.0 + 1e-6);
    }
  }
}

TEST_CASE("moment perturbation to W1 scaling") {
  // Robustness scaling: a delta perturbation per moment moves the recovered
  // distribution by at most ~ C k delta^(1/(2k-1)).
  Rng rng(36);
  for (int k = 2; k <= 3; ++k) {
    for (int t = 0; t < 6; ++t) {
      const auto d = random_separated_1d(rng, k, 0.2, 0.1);
      auto m = moments_of(d, 2 * k - 1);
      const double delta = 1e-3;
      for (auto& v : m.values)
        v += delta * (rng.next_double() < 0.5 ? -1.0 : 1.0);
      const auto p = project_to_moment_space(m, {-1.0, 1.0});
      const auto rec = gauss_quadrature(p, k, {{-1.0, 1.0}});
      const double w1 = wasserstein1_1d(d, rec);
      const double bound = 10.0 * k * std::pow(2.0 * delta, 1.0 / (2 * k - 1));
      CHECK(w1 <= bound);
    }
  }
}

TEST_SUITE_END();
