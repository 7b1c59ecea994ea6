#pragma once

#include <cstdint>
#include <utility>

namespace ce {

// splitmix64; identical seeds give identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept;
  // Uniform on [0, 1) with 53 random bits.
  double next_uniform() noexcept;
  // Standard normal pair by Box-Muller over two uniforms.
  std::pair<double, double> next_normal_pair() noexcept;

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace ce
