#ifndef BIASLAB_RNG_HPP
#define BIASLAB_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace biaslab {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stable seed for an independent substream identified by a path of integers, e.g.
/// (master, network_id, assignment_id, purpose). Identical paths always give identical seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline Engine make_engine(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Engine(derive_seed(master, path));
}

/// k distinct elements drawn uniformly from `pool` (all of it when k >= pool.size()), by a
/// partial Fisher-Yates shuffle. The pool is reordered in place.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T>& pool, std::size_t k, Engine& rng) {
  const std::size_t take = k < pool.size() ? k : pool.size();
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  return std::vector<T>(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
}

}  // namespace biaslab

#endif  // BIASLAB_RNG_HPP
