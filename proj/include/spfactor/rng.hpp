#pragma once

#include <cstdint>
#include <random>

namespace spfactor {

// Random source for everything the engine draws. The raw generator is
// std::mt19937_64 (its output sequence is pinned by the standard); the
// distributions on top are implemented here rather than taken from <random>
// because the library's distribution algorithms are implementation-defined
// and every draw in a run has to be reproducible from the seed alone.
//
// Substreams: stream k of master seed s is mt19937_64 seeded with
// splitmix64(s + (k+1) * 0x9E3779B97F4A7C15). Chains, replicates, and the
// simulator each own one substream; nothing shares an Rng.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  static std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);
  static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(stream_seed(seed, stream));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on the open interval (0,1), 52 random bits.
  double uniform() {
    return (static_cast<double>(gen_() >> 12) + 0.5) * 0x1p-52;
  }

  // Uniform integer on [lo, hi], inclusive, by rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Standard normal via Marsaglia's polar method (second variate cached).
  double normal();

  // Gamma(shape, rate 1) via Marsaglia-Tsang squeeze/rejection; shape < 1
  // handled with the power-of-uniform boost.
  double gamma(double shape);

  // Poisson(mean): inversion by unrest for small means, PTRD transformed
  // rejection for large ones.
  std::int64_t poisson(double mean);

 private:
  std::mt19937_64 gen_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace spfactor
