#ifndef SHILLSIM_RNG_HPP
#define SHILLSIM_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace shillsim {

// Deterministic random stream.  std::mt19937_64 supplies the raw bits; every
// distribution on top of it is mapped by hand so that sequences do not depend
// on the standard library's implementation-defined algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_bits() { return engine_(); }

  // Uniform double in [0, 1).
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; draws are produced in pairs and cached.
  double normal();
  double normal(double mean, double stddev);

  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t n);

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Draws n distinct elements from pool, order randomized.  n must not exceed
  // the pool size.
  template <typename T>
  std::vector<T> sample(std::vector<T> pool, std::size_t n) {
    std::vector<T> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = i + static_cast<std::size_t>(below(pool.size() - i));
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stable seed derivation for independent substreams: the base seed is mixed
// (splitmix64 finalizer) with a tag hash and up to two coordinates.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                          std::uint64_t a = 0, std::uint64_t b = 0);

}  // namespace shillsim

#endif
