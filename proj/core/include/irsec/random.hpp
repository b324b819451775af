#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "irsec/numerics.hpp"

namespace irsec {

// Name of the generator recipe, recorded next to every generated artifact.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64 seeded by splitmix64(seed)";

// splitmix64 finalizer over (root, counter). Used to derive independent
// per-sample and per-trial seeds from one root seed.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t counter);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Circularly-symmetric CN(0, 1): real and imaginary parts each N(0, 1/2).
  cplx complex_normal();
  // Uniform on [0, 1).
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  double normal(double mean = 0.0, double stddev = 1.0);
  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> half_normal_{0.0, 0.70710678118654752440};
};

CMat complex_normal_matrix(Rng& rng, std::size_t rows, std::size_t cols);
CVec complex_normal_vector(Rng& rng, std::size_t dim);

}  // namespace irsec
