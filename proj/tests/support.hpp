#pragma once
// Random fixtures and long-double brute-force references for the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "gmi/dist_core.hpp"

namespace testing {

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(k);
  for (auto& x : w) x = e(rng) + 1e-3;
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= s;
  return w;
}

inline gmi::MassFunction random_mass(std::mt19937_64& rng, std::size_t k) {
  const auto p = random_simplex(rng, k);
  std::vector<gmi::Atom> atoms;
  for (std::size_t i = 0; i < k; ++i) atoms.push_back({"a" + std::to_string(i), p[i]});
  return gmi::validate_mass(std::move(atoms));
}

inline std::size_t uniform_size(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline gmi::JointMass random_product(std::mt19937_64& rng, std::size_t max_side) {
  return gmi::product_joint(random_mass(rng, uniform_size(rng, 1, max_side)),
                            random_mass(rng, uniform_size(rng, 1, max_side)));
}

// Dense joint with independently drawn cells; rejected until it is visibly
// dependent.
inline gmi::JointMass random_dependent(std::mt19937_64& rng, std::size_t max_side) {
  for (;;) {
    const std::size_t r = uniform_size(rng, 2, max_side);
    const std::size_t c = uniform_size(rng, 2, max_side);
    const auto p = random_simplex(rng, r * c);
    std::vector<gmi::Cell> cells;
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        cells.push_back({static_cast<std::int64_t>(i + 1), static_cast<std::int64_t>(j + 1), p[i * c + j]});
      }
    }
    auto joint = gmi::joint_from_entries(std::move(cells));
    if (gmi::factorization_residual(joint) > 1e-3) return joint;
  }
}

inline gmi::JointMass random_permutation(std::mt19937_64& rng, std::size_t max_side) {
  const std::size_t k = uniform_size(rng, 2, max_side);
  const auto p = random_simplex(rng, k);
  std::vector<std::int64_t> perm(k);
  std::iota(perm.begin(), perm.end(), 1);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<gmi::Cell> cells;
  for (std::size_t i = 0; i < k; ++i) cells.push_back({static_cast<std::int64_t>(i + 1), perm[i], p[i]});
  return gmi::joint_from_entries(std::move(cells));
}

// Sparse joint over a random subset of a grid.
inline gmi::JointMass random_sparse(std::mt19937_64& rng, std::size_t max_side) {
  const std::size_t r = uniform_size(rng, 1, max_side);
  const std::size_t c = uniform_size(rng, 1, max_side);
  std::vector<gmi::Cell> cells;
  std::bernoulli_distribution keep(0.4);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      if (keep(rng)) cells.push_back({static_cast<std::int64_t>(i), static_cast<std::int64_t>(j), 0.0});
    }
  }
  if (cells.empty()) cells.push_back({0, 0, 0.0});
  const auto p = random_simplex(rng, cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i].p = p[i];
  return gmi::joint_from_entries(std::move(cells));
}

// ---------------------------------------------------------------- references

struct Reference {
  long double h_x = 0, h_y = 0, h_xy = 0, mi = 0;
};

// Order-n measures straight from the definitions, in long double.
inline Reference brute_force(const gmi::JointMass& joint, int n) {
  std::map<std::int64_t, long double> rows, cols;
  long double z = 0;
  for (const auto& c : joint.cells()) z += std::pow(static_cast<long double>(c.p), n);
  std::vector<long double> q;
  for (const auto& c : joint.cells()) {
    const long double v = std::pow(static_cast<long double>(c.p), n) / z;
    q.push_back(v);
    rows[c.row] += v;
    cols[c.col] += v;
  }
  auto h = [](long double v) { return v > 0 ? -v * std::log(v) : 0.0L; };
  Reference r;
  for (const auto& [k, v] : rows) r.h_x += h(v);
  for (const auto& [k, v] : cols) r.h_y += h(v);
  std::size_t i = 0;
  for (const auto& c : joint.cells()) {
    const long double v = q[i++];
    r.h_xy += h(v);
    r.mi += v * std::log(v / (rows[c.row] * cols[c.col]));
  }
  return r;
}

inline std::uint64_t ulp_distance(double a, double b) {
  if (a == b) return 0;
  if (std::isnan(a) || std::isnan(b)) return UINT64_MAX;
  auto key = [](double x) {
    std::int64_t i;
    std::memcpy(&i, &x, sizeof i);
    return i < 0 ? INT64_MIN - i : i;
  };
  const std::int64_t ka = key(a);
  const std::int64_t kb = key(b);
  return ka > kb ? static_cast<std::uint64_t>(ka) - static_cast<std::uint64_t>(kb)
                 : static_cast<std::uint64_t>(kb) - static_cast<std::uint64_t>(ka);
}

}  // namespace testing
