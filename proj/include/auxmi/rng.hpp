#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace auxmi {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive well-mixed substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// FNV-1a over a label, so substreams can be keyed by names (cell ids).
constexpr std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed of the substream identified by (master, keys...). The result depends
/// only on its arguments, never on the order in which streams are created.
constexpr std::uint64_t substream_seed(std::uint64_t master,
                                       std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
  return h;
}

inline Rng make_substream(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  return Rng(substream_seed(master, keys));
}

}  // namespace auxmi
