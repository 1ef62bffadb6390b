#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <type_traits>

namespace greyshill {

using Rng = std::mt19937_64;

namespace detail {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t mix_token(std::uint64_t h, std::string_view s) {
  const std::uint64_t len = s.size();
  h = fnv1a(h, &len, sizeof len);
  return fnv1a(h, s.data(), s.size());
}

template <typename T>
std::uint64_t mix_token(std::uint64_t h, const T& v) {
  if constexpr (std::is_convertible_v<const T&, std::string_view>) {
    return mix_token(h, std::string_view(v));
  } else if constexpr (std::is_floating_point_v<T>) {
    // Canonicalise -0.0 so equal values hash equally.
    const double d = v == 0 ? 0.0 : static_cast<double>(v);
    return fnv1a(h, &d, sizeof d);
  } else {
    static_assert(std::is_integral_v<T> || std::is_enum_v<T>);
    const auto w = static_cast<std::uint64_t>(v);
    return fnv1a(h, &w, sizeof w);
  }
}

// splitmix64 finaliser
inline std::uint64_t avalanche(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Stable seed derived from a base seed and any number of integral, floating
/// or string tokens. Independent of platform hashing and evaluation order.
template <typename... Tokens>
std::uint64_t derive_seed(std::uint64_t base, const Tokens&... tokens) {
  std::uint64_t h = detail::mix_token(detail::kFnvOffset, base);
  ((h = detail::mix_token(h, tokens)), ...);
  return detail::avalanche(h);
}

}  // namespace greyshill
