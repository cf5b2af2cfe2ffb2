#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace annotis {

// Seeded RNG with portable derived draws. std::uniform_int_distribution is
// implementation-defined, so bounded draws and shuffles are done by hand to
// keep runs byte-reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, n). n must be > 0.
  std::size_t below(std::size_t n) {
    std::uint64_t bound = n == 0 ? 1 : ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t r = next_u64();
    while (r >= bound) r = next_u64();
    return static_cast<std::size_t>(r % n);
  }

  // Uniform in [lo, hi], inclusive.
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }

  // Uniform in [0, 1) with 53-bit resolution.
  double unit() { return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0); }

  bool chance(double p) { return unit() < p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k && !pool.empty(); ++i) {
      std::size_t j = below(pool.size());
      out.push_back(pool[j]);
      pool[j] = pool.back();
      pool.pop_back();
    }
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace annotis
