#ifndef CEP_RNG_HPP
#define CEP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace cep {

/// splitmix64 step; used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic seed for a work item identified by (seed, parts...). Every
/// per-instance or per-(q, instance) stream is derived this way, so results
/// do not depend on scheduling or thread count.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t state = seed ^ 0x6a09e667f3bcc909ULL;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t p : parts) {
    state ^= p + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2);
    out = splitmix64(state);
  }
  return out;
}

/// Seeded random stream. All draws are built from raw mt19937_64 output
/// (whose sequence the standard pins down exactly), not from the
/// implementation-defined standard distributions, so identical seeds give
/// identical draws on any platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1].
  double uniform01_open_low() { return 1.0 - uniform01(); }

  /// Uniform integer in [0, n); rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RandomStream::below(0)");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  int index(std::size_t n) { return static_cast<int>(below(n)); }

  /// Categorical draw by CDF inversion over `weights` (need not be normalized).
  int categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  /// Uniform point on the probability simplex (exponential spacings).
  std::vector<double> simplex_point(std::size_t dim) {
    std::vector<double> point(dim);
    double sum = 0.0;
    for (double& v : point) {
      v = -std::log(uniform01_open_low());
      sum += v;
    }
    for (double& v : point) v /= sum;
    return point;
  }

  /// Fisher-Yates with draws from this stream (std::shuffle's draw pattern is
  /// unspecified, this one is pinned).
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cep

#endif
