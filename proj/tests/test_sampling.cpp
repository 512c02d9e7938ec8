#include <doctest.h>

#include <cmath>
#include <random>

#include "gmi/gmi_core.hpp"
#include "gmi/sampling_oracle.hpp"
#include "gmi/tail_families.hpp"
#include "support.hpp"

using namespace gmi;

TEST_CASE("sampling a point mass") {
  const auto labels = sample_mass(validate_mass({{"only", 1.0}}), 5, 9);
  REQUIRE(labels.size() == 5);
  for (const auto& l : labels) CHECK(l == "only");
}

TEST_CASE("sampling a fair coin stays within three sigma") {
  const auto idx = sample_indices(validate_mass({{"h", 0.5}, {"t", 0.5}}), 1'000'000, 2024);
  std::size_t heads = 0;
  for (auto i : idx) heads += i == 0;
  CHECK(std::fabs(static_cast<double>(heads) - 500'000.0) < 3.0 * 500.0);
}

TEST_CASE("sampling is deterministic per seed") {
  const auto m = validate_mass({{"a", 0.2}, {"b", 0.3}, {"c", 0.5}});
  CHECK(sample_mass(m, 1000, 5) == sample_mass(m, 1000, 5));
  CHECK(sample_mass(m, 1000, 5) != sample_mass(m, 1000, 6));
  // A longer run extends a shorter one.
  const auto shortrun = sample_indices(m, 70'000, 5);
  const auto longrun = sample_indices(m, 140'000, 5);
  CHECK(std::equal(shortrun.begin(), shortrun.end(), longrun.begin()));
}

TEST_CASE("zero-mass atoms are never drawn") {
  const auto idx = sample_indices(validate_mass({{"a", 0.0}, {"b", 0.5}, {"c", 0.0}, {"d", 0.5}, {"e", 0.0}}),
                                  200'000, 3);
  for (auto i : idx) CHECK((i == 1 || i == 3));
}

TEST_CASE("sampling preconditions") {
  const auto m = validate_mass({{"a", 1.0}});
  CHECK_THROWS_AS(sample_mass(m, 0, 1), Error);
  CHECK_THROWS_AS(sample_mass(truncate(TailFamily::geometric(0.5), 1e-3), 10, 1), Error);
  CHECK_THROWS_AS(collision_experiment(m, Order(1), 10, 1), Error);
  CHECK_THROWS_AS(collision_experiment(m, Order(2), 0, 1), Error);
}

TEST_CASE("collision experiment on a fair coin") {
  const auto r = collision_experiment(validate_mass({{"h", 0.5}, {"t", 0.5}}), Order(2), 200'000, 77);
  CHECK(r.eta_n == doctest::Approx(0.5));
  CHECK(std::fabs(r.collision_rate - 0.5) < 4.0 * r.rate_sigma);
  CHECK(r.empirical.probabilities()[0] == doctest::Approx(0.5).epsilon(0.01));
  CHECK(r.collisions <= r.trials);
  CHECK(r.counts[0] + r.counts[1] == r.collisions);
  CHECK(r.generator == kGeneratorId);
}

TEST_CASE("collision experiment reproduces the order-2 transform of (2/3, 1/3)") {
  const auto r = collision_experiment(validate_mass({{"a", 2.0 / 3.0}, {"b", 1.0 / 3.0}}), Order(2),
                                      1'000'000, 1);
  CHECK(r.tv_distance < 0.01);
  CHECK(r.empirical.probabilities()[0] == doctest::Approx(0.8).epsilon(0.01));
  CHECK(std::fabs(r.collision_rate - 5.0 / 9.0) < 4.0 * r.rate_sigma);
}

TEST_CASE("point mass always collides") {
  const auto r = collision_experiment(validate_mass({{"x", 1.0}}), Order(4), 1000, 3);
  CHECK(r.collisions == 1000);
  CHECK(r.tv_distance == 0.0);
  CHECK(r.rate_sigma == 0.0);
}

TEST_CASE("no collisions is an error") {
  std::vector<Atom> atoms;
  for (int i = 0; i < 1000; ++i) atoms.push_back({std::to_string(i), 1e-3});
  try {
    collision_experiment(validate_mass(atoms), Order(5), 10, 1);
    FAIL("expected NoCollisions");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoCollisions);
  }
}

TEST_CASE("collision counts do not depend on worker count") {
  const auto m = validate_mass({{"a", 0.4}, {"b", 0.3}, {"c", 0.2}, {"d", 0.1}});
  const auto a = collision_experiment(m, Order(3), 300'000, 11, 1);
  const auto b = collision_experiment(m, Order(3), 300'000, 11, 3);
  const auto c = collision_experiment(m, Order(3), 300'000, 11, 8);
  CHECK(a.counts == b.counts);
  CHECK(a.counts == c.counts);
  CHECK(a.tv_distance == c.tv_distance);
}

TEST_CASE("tv distance stays small across seeds") {
  std::mt19937_64 rng(41);
  int failures = 0;
  int runs = 0;
  constexpr int kSeeds = 100;
  for (int s = 0; s < kSeeds; ++s) {
    const auto m = testing::random_mass(rng, testing::uniform_size(rng, 2, 10));
    const auto r = collision_experiment(m, Order(2), 1'000'000, 1000 + s);
    if (!(r.eta_n >= 0.1)) continue;
    ++runs;
    failures += r.tv_distance >= 0.02;
  }
  CHECK(runs >= 50);
  CHECK(failures < 0.01 * runs);
}

TEST_CASE("plug-in joints") {
  ContingencyTable one;
  one.add(1, 1, 1);
  const auto j = plugin_joint(one);
  CHECK(j.cells().size() == 1);

  ContingencyTable u;
  for (int i = 1; i <= 2; ++i)
    for (int k = 1; k <= 2; ++k) u.add(i, k, 25);
  CHECK(u.total() == 100);
  const auto ju = plugin_joint(u);
  CHECK(ju.find(2, 1).value() == 0.25);

  try {
    plugin_joint(ContingencyTable{});
    FAIL("expected EmptyTable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyTable);
  }
  ContingencyTable zero;
  zero.add(1, 1, 0);
  CHECK_THROWS_AS(plugin_joint(zero), Error);
}

TEST_CASE("plug-in estimate from a large sample is close to the truth") {
  const auto truth = joint_from_entries({{1, 1, 0.4}, {1, 2, 0.1}, {2, 1, 0.1}, {2, 2, 0.4}});
  const auto est = plugin_joint(sample_joint(truth, 1'000'000, 5));
  CHECK(std::fabs(mi_n(est, Order(2)).value - mi_n(truth, Order(2)).value) < 0.01);
}

TEST_CASE("plug-in MI_2 of a product joint shrinks with more draws") {
  std::mt19937_64 rng(42);
  int smaller = 0;
  constexpr int kSeeds = 40;
  for (int s = 0; s < kSeeds; ++s) {
    const auto truth = product_joint(testing::random_mass(rng, testing::uniform_size(rng, 2, 4)),
                                     testing::random_mass(rng, testing::uniform_size(rng, 2, 4)));
    const double few = mi_n(plugin_joint(sample_joint(truth, 10'000, 100 + s)), Order(2)).value;
    const double many = mi_n(plugin_joint(sample_joint(truth, 1'000'000, 500 + s)), Order(2)).value;
    smaller += many < few;
  }
  CHECK(smaller >= 38);  // 95% of seeds
}
