#ifndef FLUX_RANDOM_H_
#define FLUX_RANDOM_H_

#include <cstdint>
#include <random>

namespace flux {

// Deterministic stream over std::mt19937_64. The engine's output sequence is
// fixed by the standard; the bounded and real-valued draws below are done by
// hand because the std distributions are implementation-defined.
class SeededRandomSource {
 public:
  explicit SeededRandomSource(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, bound). bound must be positive.
  std::uint64_t Below(std::uint64_t bound) {
    const std::uint64_t limit = -bound % bound;  // 2^64 mod bound
    while (true) {
      const std::uint64_t x = engine_();
      if (x >= limit) return x % bound;
    }
  }

  // Uniform on [0, 1) with 53 bits of precision.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace flux

#endif  // FLUX_RANDOM_H_
