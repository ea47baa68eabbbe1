#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace holodyn {

// Halton sequence in up to 6 dimensions with a Cranley-Patterson rotation
// drawn from the seed. Deterministic: point i depends only on (seed, i).
class Halton {
 public:
  static constexpr int kMaxAxes = 6;

  explicit Halton(int dims, std::uint64_t seed = 0) : dims_(dims) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& s : shift_) s = (seed == 0) ? 0.0 : u(rng);
  }

  int dims() const { return dims_; }

  void point(std::uint64_t index, double* out) const {
    static constexpr std::array<int, kMaxAxes> primes{2, 3, 5, 7, 11, 13};
    for (int k = 0; k < dims_; ++k) {
      double f = 1.0, r = 0.0;
      const int b = primes[k];
      for (std::uint64_t i = index + 1; i > 0; i /= b) {
        f /= b;
        r += f * static_cast<double>(i % b);
      }
      r += shift_[k];
      out[k] = r - static_cast<double>(static_cast<int>(r));
    }
  }

 private:
  int dims_;
  std::array<double, kMaxAxes> shift_{};
};

}  // namespace holodyn
