#pragma once

#include <cstdint>
#include <random>

namespace rpinn {

// Deterministic random stream. Scaling from raw 64-bit draws is done
// explicitly so sequences are identical across standard library
// implementations (std::uniform_real_distribution is not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // uniform in [0,1), 53-bit resolution
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // integer in [0, n), n > 0
  std::uint64_t below(std::uint64_t n) {
    // rejection-free modulo is fine here; bias is ~n/2^64
    return engine_() % n;
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rpinn
