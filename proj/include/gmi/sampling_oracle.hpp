#pragma once
// Simulation checks: iid sampling, the total-collision experiment, and
// plug-in joints from contingency counts.
//
// Randomness comes from mt19937_64 engines, one per block of
// kBlockTrials draws, each seeded by splitmix64 from (seed, block index).
// Results therefore do not depend on how blocks are spread over workers.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gmi/dist_core.hpp"
#include "gmi/gmi_core.hpp"

namespace gmi {

inline constexpr std::string_view kGeneratorId = "mt19937_64/splitmix64-blocks-65536";
inline constexpr std::uint64_t kBlockTrials = 65536;

// Atom indices drawn by inverse CDF over the atom order.
std::vector<std::size_t> sample_indices(const MassFunction& mass, std::uint64_t count,
                                        std::uint64_t seed);
std::vector<std::string> sample_mass(const MassFunction& mass, std::uint64_t count,
                                     std::uint64_t seed);

struct CollisionReport {
  int n = 2;
  std::uint64_t trials = 0;
  std::uint64_t collisions = 0;
  std::uint64_t seed = 0;
  std::string generator;
  std::vector<std::uint64_t> counts;  // per atom of the input
  MassFunction empirical;             // counts / collisions
  double tv_distance = 0.0;           // against cdotc(mass, n)
  double collision_rate = 0.0;        // collisions / trials
  double eta_n = 0.0;                 // sum p^n
  double rate_sigma = 0.0;            // binomial sd of collision_rate at eta_n
};

// Draws n letters per trial and keeps the letter when all n agree.
CollisionReport collision_experiment(const MassFunction& mass, Order n, std::uint64_t trials,
                                     std::uint64_t seed, unsigned workers = 1);

class ContingencyTable {
 public:
  using Key = std::pair<std::int64_t, std::int64_t>;

  void add(std::int64_t row, std::int64_t col, std::uint64_t count);
  const std::map<Key, std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept { return total_; }

 private:
  std::map<Key, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// counts / total with tolerance 1e-9.
JointMass plugin_joint(const ContingencyTable& table);

// draws iid cells from an exact joint.
ContingencyTable sample_joint(const JointMass& joint, std::uint64_t draws, std::uint64_t seed);

}  // namespace gmi
