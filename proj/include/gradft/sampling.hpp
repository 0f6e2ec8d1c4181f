#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <utility>
#include <vector>

#include "gradft/data.hpp"
#include "gradft/rng.hpp"

namespace gradft {

struct SplitSpec {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;

  void validate() const {
    if (train < 0 || dev < 0 || test < 0) throw Error("split fractions must be non-negative");
    if (std::abs(train + dev + test - 1.0) > 1e-9)
      throw Error("split fractions must sum to 1");
  }
};

// Uniform draw of `amount` distinct positions from [0, pool_size), via a
// partial Fisher-Yates shuffle. Stage pools are kept as index lists so
// nesting is verifiable exactly and memory stays linear.
inline std::vector<std::size_t> sample_indices(std::size_t pool_size, std::size_t amount,
                                               Rng& rng) {
  if (amount > pool_size) {
    std::ostringstream os;
    os << "cannot sample " << amount << " from pool of " << pool_size;
    throw Error(os.str());
  }
  std::vector<std::size_t> idx(pool_size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < amount; ++i) {
    std::size_t j = i + rng.uniform_index(pool_size - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(amount);
  return idx;
}

// Uniform without replacement; result is a sub-multiset of `pool`.
inline Dataset sample(const Dataset& pool, std::size_t amount, Rng& rng) {
  std::vector<std::size_t> idx = sample_indices(pool.size(), amount, rng);
  Dataset out = pool.like();
  out.examples.reserve(amount);
  for (std::size_t i : idx) out.examples.push_back(pool.examples[i]);
  return out;
}

inline void shuffle(Dataset& d, Rng& rng) {
  for (std::size_t i = d.size(); i > 1; --i) {
    std::size_t j = rng.uniform_index(i);
    std::swap(d.examples[i - 1], d.examples[j]);
  }
}

// T = D ∪ O, uniformly shuffled. Domain tags are preserved; the shuffle
// keeps the mix order from encoding domain structure.
inline Dataset mix(const Dataset& in_domain, const Dataset& out_domain, Rng& rng) {
  if (in_domain.feature_dim != out_domain.feature_dim ||
      in_domain.num_classes != out_domain.num_classes)
    throw Error("mix: datasets disagree on feature_dim or num_classes");
  Dataset out = in_domain.like();
  out.examples.reserve(in_domain.size() + out_domain.size());
  out.examples.insert(out.examples.end(), in_domain.examples.begin(), in_domain.examples.end());
  out.examples.insert(out.examples.end(), out_domain.examples.begin(), out_domain.examples.end());
  shuffle(out, rng);
  return out;
}

struct SplitResult {
  Dataset train;
  Dataset dev;
  Dataset test;
};

// Disjoint partition with floor allocations; the remainder goes to train.
inline SplitResult split(const Dataset& d, const SplitSpec& spec, Rng& rng) {
  spec.validate();
  std::size_t n = d.size();
  std::size_t n_dev = static_cast<std::size_t>(std::floor(spec.dev * static_cast<double>(n)));
  std::size_t n_test = static_cast<std::size_t>(std::floor(spec.test * static_cast<double>(n)));
  std::size_t n_train = n - n_dev - n_test;
  if (spec.dev > 0 && n_dev == 0) throw Error("split: dev fraction positive but dev split empty");
  if (spec.test > 0 && n_test == 0)
    throw Error("split: test fraction positive but test split empty");

  Dataset shuffled = d;
  shuffle(shuffled, rng);
  SplitResult r{d.like(), d.like(), d.like()};
  auto it = shuffled.examples.begin();
  r.train.examples.assign(it, it + static_cast<std::ptrdiff_t>(n_train));
  it += static_cast<std::ptrdiff_t>(n_train);
  r.dev.examples.assign(it, it + static_cast<std::ptrdiff_t>(n_dev));
  it += static_cast<std::ptrdiff_t>(n_dev);
  r.test.examples.assign(it, shuffled.examples.end());
  return r;
}

}  // namespace gradft
