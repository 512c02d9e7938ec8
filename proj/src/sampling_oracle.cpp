#include "gmi/sampling_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "kernels/compensated.hpp"

namespace gmi {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t block) {
  std::uint64_t state = seed;
  const std::uint64_t a = splitmix64(state);
  state = a ^ (block * 0xD1B54A32D192ED03ULL);
  return std::mt19937_64(splitmix64(state));
}

class InverseCdf {
 public:
  explicit InverseCdf(std::span<const double> p) : cdf_(p.size()) {
    kernels::detail::Compensated acc;
    for (std::size_t i = 0; i < p.size(); ++i) {
      acc.add(p[i]);
      cdf_[i] = acc.value();
      if (p[i] > 0.0) last_positive_ = i;
    }
    total_ = acc.value();
  }

  std::size_t operator()(std::mt19937_64& engine) const {
    const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53 * total_;
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto i = static_cast<std::size_t>(it - cdf_.begin());
    return std::min(i, last_positive_);
  }

 private:
  std::vector<double> cdf_;
  double total_ = 1.0;
  std::size_t last_positive_ = 0;
};

void require_exact(const MassFunction& mass) {
  if (!mass.is_exact()) {
    throw Error(ErrorCode::BadParameter, "sampling requires an exact finite distribution");
  }
}

std::uint64_t block_count(std::uint64_t total) { return (total + kBlockTrials - 1) / kBlockTrials; }

template <class BlockFn>
void for_blocks(std::uint64_t blocks, unsigned workers, BlockFn&& fn) {
  workers = static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, std::max<std::uint64_t>(blocks, 1)));
  if (workers == 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) fn(b);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::uint64_t b = w; b < blocks; b += workers) fn(b);
    });
  }
}

}  // namespace

std::vector<std::size_t> sample_indices(const MassFunction& mass, std::uint64_t count,
                                        std::uint64_t seed) {
  require_exact(mass);
  if (count < 1) throw Error(ErrorCode::BadParameter, "count must be >= 1");
  const InverseCdf draw(mass.probabilities());
  std::vector<std::size_t> out(count);
  for (std::uint64_t b = 0; b < block_count(count); ++b) {
    auto engine = block_engine(seed, b);
    const std::uint64_t end = std::min(count, (b + 1) * kBlockTrials);
    for (std::uint64_t i = b * kBlockTrials; i < end; ++i) out[i] = draw(engine);
  }
  return out;
}

std::vector<std::string> sample_mass(const MassFunction& mass, std::uint64_t count,
                                     std::uint64_t seed) {
  const auto idx = sample_indices(mass, count, seed);
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(mass.labels()[i]);
  return out;
}

CollisionReport collision_experiment(const MassFunction& mass, Order n, std::uint64_t trials,
                                     std::uint64_t seed, unsigned workers) {
  require_exact(mass);
  if (n.value() < 2) throw Error(ErrorCode::BadParameter, "collision experiment needs n >= 2");
  if (trials < 1) throw Error(ErrorCode::BadParameter, "trials must be >= 1");

  const InverseCdf draw(mass.probabilities());
  const std::size_t atoms = mass.size();
  const std::uint64_t blocks = block_count(trials);
  std::vector<std::vector<std::uint64_t>> block_counts(blocks, std::vector<std::uint64_t>(atoms, 0));

  for_blocks(blocks, workers, [&](std::uint64_t b) {
    auto engine = block_engine(seed, b);
    auto& counts = block_counts[b];
    const std::uint64_t end = std::min(trials, (b + 1) * kBlockTrials);
    for (std::uint64_t t = b * kBlockTrials; t < end; ++t) {
      const std::size_t first = draw(engine);
      bool all_same = true;
      for (int d = 1; d < n.value(); ++d) all_same &= draw(engine) == first;
      if (all_same) ++counts[first];
    }
  });

  CollisionReport r;
  r.n = n.value();
  r.trials = trials;
  r.seed = seed;
  r.generator = std::string(kGeneratorId);
  r.counts.assign(atoms, 0);
  for (const auto& counts : block_counts) {
    for (std::size_t i = 0; i < atoms; ++i) r.counts[i] += counts[i];
  }
  for (auto c : r.counts) r.collisions += c;
  if (r.collisions == 0) {
    throw Error(ErrorCode::NoCollisions, "no total collisions in " + std::to_string(trials) +
                                             " trials at n = " + std::to_string(n.value()));
  }

  std::vector<double> freq(atoms);
  for (std::size_t i = 0; i < atoms; ++i) {
    freq[i] = static_cast<double>(r.counts[i]) / static_cast<double>(r.collisions);
  }
  r.empirical = MassFunction::from_parts(mass.labels(), freq, 0.0, kDefaultTolerance);

  const MassFunction escort = cdotc(mass, n);
  kernels::detail::Compensated tv;
  for (std::size_t i = 0; i < atoms; ++i) tv.add(std::fabs(freq[i] - escort.probabilities()[i]));
  r.tv_distance = 0.5 * tv.value();

  kernels::detail::Compensated eta;
  for (double p : mass.probabilities()) eta.add(std::pow(p, n.value()));
  r.eta_n = eta.value();
  r.collision_rate = static_cast<double>(r.collisions) / static_cast<double>(trials);
  r.rate_sigma = std::sqrt(r.eta_n * (1.0 - r.eta_n) / static_cast<double>(trials));
  return r;
}

void ContingencyTable::add(std::int64_t row, std::int64_t col, std::uint64_t count) {
  counts_[{row, col}] += count;
  total_ += count;
}

JointMass plugin_joint(const ContingencyTable& table) {
  if (table.total() == 0) throw Error(ErrorCode::EmptyTable, "contingency table has no counts");
  std::vector<Cell> cells;
  cells.reserve(table.counts().size());
  const auto total = static_cast<double>(table.total());
  for (const auto& [key, count] : table.counts()) {
    cells.push_back({key.first, key.second, static_cast<double>(count) / total});
  }
  return JointMass::from_entries(std::move(cells), kDefaultTolerance);
}

ContingencyTable sample_joint(const JointMass& joint, std::uint64_t draws, std::uint64_t seed) {
  if (!joint.is_exact()) throw Error(ErrorCode::BadParameter, "sampling requires an exact joint");
  const auto cells = joint.cells();
  const auto idx = sample_indices(joint.flat(), draws, seed);
  std::vector<std::uint64_t> counts(cells.size(), 0);
  for (auto i : idx) ++counts[i];
  ContingencyTable table;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (counts[i] > 0) table.add(cells[i].row, cells[i].col, counts[i]);
  }
  return table;
}

}  // namespace gmi
