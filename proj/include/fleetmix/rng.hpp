#pragma once

#include <cstdint>
#include <vector>

namespace fleetmix {

/// Deterministic 64-bit generator (SplitMix64, Steele et al. 2014).
///
/// Chosen over std::mt19937 + std::*_distribution because the standard
/// distributions are implementation-defined: with SplitMix64 and the explicit
/// mappings below, a (seed, stream) pair produces the same values on every
/// platform. Output manifests record the algorithm name ("splitmix64").
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Independent substream: hashes (seed, stream index) into a fresh state so
  /// workers can draw concurrently without sharing a sequence.
  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    Rng mix(seed);
    std::uint64_t a = mix.next_u64();
    Rng mix2(stream ^ 0x9e3779b97f4a7c15ULL);
    return Rng(a ^ mix2.next_u64());
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1): top 53 bits scaled by 2^-53.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform integer in [0, n), n > 0. Uses rejection to avoid modulo bias.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t(0) - ~std::uint64_t(0) % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  /// Index drawn with probability proportional to weights[i]; weights >= 0,
  /// not all zero.
  std::size_t weighted_index(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double r = next_double() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      r -= weights[i];
      if (r < 0.0) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  static constexpr const char* algorithm_name() { return "splitmix64"; }

 private:
  std::uint64_t state_;
};

}  // namespace fleetmix
