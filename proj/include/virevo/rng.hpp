#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace virevo {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// FNV-1a over the label bytes.
constexpr std::uint64_t label_hash(std::string_view label) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed of the substream (master, label, replica):
///   s = splitmix64(splitmix64(master) ^ fnv1a(label))
///   seed = splitmix64(s + (replica + 1) * 0x9E3779B97F4A7C15)
/// Every replica owns its substreams, so results never depend on which
/// worker ran the replica or in what order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                    std::uint64_t replica) noexcept {
  const std::uint64_t s = splitmix64(splitmix64(master) ^ label_hash(label));
  return splitmix64(s + (replica + 1) * 0x9E3779B97F4A7C15ULL);
}

/// One named random stream. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; the variate transforms below are
/// written out so draws are identical across standard libraries.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}
  Stream(std::uint64_t master, std::string_view label, std::uint64_t replica)
      : engine_(derive_seed(master, label, replica)) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on the open interval (0,1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform on (0,1]; safe argument for log().
  double uniform_positive() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform_positive()) / rate; }

  bool bernoulli(double p) { return uniform_open() < p; }

  // Uniform integer in [0, n), n >= 1, by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % n;
    }
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace virevo
