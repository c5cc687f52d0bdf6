#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace kgtext {

// Deterministic random source. All sampling goes through the explicit
// helpers below rather than std:: distributions, whose output is
// implementation-defined; this keeps artifacts byte-reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform in [0, n) via rejection sampling.
  std::size_t index(std::size_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return static_cast<std::size_t>(v % n);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double real() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double real(double lo, double hi) { return lo + (hi - lo) * real(); }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  // Independent substream, e.g. one per batch item.
  Rng fork(std::uint64_t stream) {
    return Rng(gen_() ^ (stream * 0x9e3779b97f4a7c15ULL));
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace kgtext
