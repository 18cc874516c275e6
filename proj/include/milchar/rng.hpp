#pragma once

// Counter-based random numbers.
//
// Generator "splitmix64-ctr/1": a stream is identified by a 64-bit key and
// the i-th output of the stream is mix64(key + (i + 1) * golden), where mix64
// is the SplitMix64 finalizer. Because outputs are a pure function of
// (key, counter), any consumer can derive an independent stream from a parent
// key plus tags (bag index, role, fold, ...) without touching shared state.
// That is what makes the generators and the evaluation grid independent of
// execution order.
//
// Changing anything in this file changes every generated dataset; bump the
// version suffix of kRngName when doing so.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace milchar {

inline constexpr std::string_view kRngName = "splitmix64-ctr/1";

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// FNV-1a, used to fold names into stream keys.
constexpr std::uint64_t hash_string(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

// Derives a child stream key from a parent key and a tag.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t tag) noexcept {
  return detail::mix64(parent ^ detail::mix64(tag + detail::kGolden));
}

constexpr std::uint64_t derive_key(std::uint64_t parent, std::string_view tag) noexcept {
  return derive_key(parent, detail::hash_string(tag));
}

template <typename Tag, typename Next, typename... Rest>
constexpr std::uint64_t derive_key(std::uint64_t parent, const Tag& tag, const Next& next, const Rest&... rest) noexcept {
  return derive_key(derive_key(parent, tag), next, rest...);
}

class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  // Uniform integer on the closed range [lo, hi]; unbiased via rejection.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) noexcept {
    const std::uint64_t span = hi - lo;
    if (span == std::numeric_limits<std::uint64_t>::max()) return (*this)();
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = max() - max() % range;
    std::uint64_t v;
    do {
      v = (*this)();
    } while (v >= limit);
    return lo + v % range;
  }

  // Standard normal via Box-Muller; consumes exactly two outputs per call.
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Fisher-Yates with our generator, so the permutation does not depend on the
// standard library's shuffle implementation.
template <typename RandomIt>
void shuffle(RandomIt first, RandomIt last, CounterRng& rng) {
  const auto n = last - first;
  for (auto i = n - 1; i > 0; --i) {
    const auto j = static_cast<decltype(i)>(rng.uniform_int(0, static_cast<std::uint64_t>(i)));
    using std::swap;
    swap(first[i], first[j]);
  }
}

}  // namespace milchar
