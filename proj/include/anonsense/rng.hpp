#pragma once

#include <cstdint>
#include <span>

namespace anonsense {

/// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the value at position i of stream s under seed
/// k is a pure function of (k, s, i), so any subset of draws can be produced
/// in any order (or on any worker) with identical results.
///
/// Internally this is SplitMix64 with its state jumped straight to
/// key + (i + 1) * golden_gamma.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const;

  /// Independent child stream; used for per-replica / per-subset streams.
  CounterRng split(std::uint64_t child) const;

 private:
  std::uint64_t key_;
};

/// Index of the first cumulative weight exceeding u*total; weights need not
/// be normalized. Zero-weight categories are never returned.
std::size_t sample_categorical(std::span<const double> weights, double u);

}  // namespace anonsense
