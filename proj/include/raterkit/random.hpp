#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace raterkit {

/// Mixes a master seed with a stage name and a sub-identifier. Every random
/// stream in the toolkit is seeded through this so that streams for different
/// stages and strata are independent and reproducible.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage,
                          std::string_view sub = {});

/// Seeded generator with portable draws. The standard distributions are
/// implementation-defined, so bounded integers and reals are derived here
/// directly from the 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::size_t below(std::size_t bound);

  /// Uniform real in [0, 1) with 53 random bits.
  double unit();

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace raterkit
