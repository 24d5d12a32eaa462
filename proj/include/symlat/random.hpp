#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <type_traits>

namespace symlat {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

namespace detail {
template <typename T>
constexpr std::uint64_t seed_tag(const T& tag) noexcept {
  if constexpr (std::is_convertible_v<const T&, std::string_view>) {
    return fnv1a(std::string_view(tag));
  } else {
    return static_cast<std::uint64_t>(tag);
  }
}
}  // namespace detail

/// Seed splitting rule: each tag (integer or string) is folded into the
/// running state through splitmix64, so a child stream depends only on the
/// master seed and its tag path, never on scheduling.
template <typename... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t master, const Tags&... tags) noexcept {
  std::uint64_t state = splitmix64(master);
  ((state = splitmix64(state ^ splitmix64(detail::seed_tag(tags)))), ...);
  return state;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

}  // namespace symlat
