#include "irsec/random.hpp"

namespace irsec {

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t counter) {
  std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(derive_seed(seed, 0)) {}

cplx Rng::complex_normal() {
  const double re = half_normal_(engine_);
  const double im = half_normal_(engine_);
  return {re, im};
}

double Rng::uniform() { return std::generate_canonical<double, 53>(engine_); }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal(double mean, double stddev) {
  std::normal_distribution<double> dist(mean, stddev);
  return dist(engine_);
}

CMat complex_normal_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  CMat m(rows, cols);
  for (cplx& z : m.entries()) z = rng.complex_normal();
  return m;
}

CVec complex_normal_vector(Rng& rng, std::size_t dim) {
  CVec v(dim);
  for (cplx& z : v.entries()) z = rng.complex_normal();
  return v;
}

}  // namespace irsec
