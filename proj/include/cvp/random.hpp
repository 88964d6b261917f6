#pragma once

// Portable random draws. The standard distributions are implementation
// defined, so anything that must reproduce across toolchains goes through
// these instead; std::mt19937_64 itself is fully specified.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace cvp {

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// Standard normal draws by the Box-Muller transform; the second value of each
// pair is cached.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01(engine_);  // (0, 1]
    const double u2 = uniform01(engine_);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double next(double mean, double sd) { return mean + sd * next(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cvp
