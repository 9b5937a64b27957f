// Seeded train/validation/test splitting of review pair comments.
//
// RPC unit: shuffle, then cut at largest-remainder counts, so sizes are
// within one item of n*ratio and sum to n exactly. Pair unit: whole
// ReviewPairs are assigned to the split with the largest remaining deficit,
// keeping every RPC of a pair in one split (no leakage across splits).
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "revcon/errors.hpp"
#include "revcon/review.hpp"
#include "revcon/rng.hpp"

namespace revcon {

struct SplitSpec {
  std::uint64_t seed = 0;
  std::array<double, 3> ratios = {0.8, 0.1, 0.1};  // train, validation, test
  enum class Unit { RPC, Pair } unit = Unit::RPC;

  void validate() const {
    double sum = 0.0;
    for (double r : ratios) {
      if (!(r > 0.0 && r < 1.0)) throw DataError("split ratios must lie in (0, 1)");
      sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DataError("split ratios must sum to 1");
  }
};

struct SplitResult {
  std::vector<ReviewPairComment> train;
  std::vector<ReviewPairComment> validation;
  std::vector<ReviewPairComment> test;
};

namespace detail {

// n*ratio rounded down, remaining items to the largest fractional parts.
inline std::array<std::size_t, 3> largest_remainder_counts(std::size_t n,
                                                           const std::array<double, 3>& ratios) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = static_cast<double>(n) * ratios[i];
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    frac[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (frac[i] > frac[best]) best = i;
    ++counts[best];
    frac[best] = -1.0;
    ++assigned;
  }
  return counts;
}

}  // namespace detail

inline SplitResult split_dataset(const std::vector<ReviewPairComment>& rpcs,
                                 const SplitSpec& spec) {
  spec.validate();
  SplitResult out;
  const std::size_t n = rpcs.size();
  if (n == 0) return out;
  Rng rng(spec.seed);
  std::array<std::vector<ReviewPairComment>*, 3> dest = {&out.train, &out.validation, &out.test};

  if (spec.unit == SplitSpec::Unit::RPC) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const auto counts = detail::largest_remainder_counts(n, spec.ratios);
    std::size_t at = 0;
    for (int s = 0; s < 3; ++s)
      for (std::size_t k = 0; k < counts[s]; ++k) dest[s]->push_back(rpcs[order[at++]]);
    return out;
  }

  // Pair unit: groups keyed by pair_id, first-appearance order, then shuffled.
  std::map<std::string, std::vector<std::size_t>> by_pair;
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = by_pair.try_emplace(rpcs[i].pair_id);
    if (inserted) keys.push_back(rpcs[i].pair_id);
    it->second.push_back(i);
  }
  rng.shuffle(keys);
  std::array<double, 3> deficit = {spec.ratios[0] * static_cast<double>(n),
                                   spec.ratios[1] * static_cast<double>(n),
                                   spec.ratios[2] * static_cast<double>(n)};
  for (const auto& key : keys) {
    int best = 0;
    for (int s = 1; s < 3; ++s)
      if (deficit[s] > deficit[best]) best = s;
    const auto& members = by_pair[key];
    for (std::size_t i : members) dest[best]->push_back(rpcs[i]);
    deficit[best] -= static_cast<double>(members.size());
  }
  return out;
}

}  // namespace revcon
