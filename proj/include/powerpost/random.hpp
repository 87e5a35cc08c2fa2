#ifndef POWERPOST_RANDOM_HPP
#define POWERPOST_RANDOM_HPP

#include <cstdint>

namespace powerpost {

// Counter-mode SplitMix64. The n-th draw is a pure function of (key, n), so
// substreams are derived by key mixing and never depend on evaluation order
// or thread count. All variate recipes below are fixed; equal seeds give
// bit-identical sequences on every platform.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t counter = 0)
      : key_(seed), counter_(counter) {}

  std::uint64_t seed() const { return key_; }

  std::uint64_t next_u64();

  // uniform on [0, 1) with 53 random mantissa bits
  double uniform01();
  double uniform(double a, double b);

  // standard normal via the trigonometric Box-Muller transform (2 draws)
  double normal();
  double normal(double mean, double stddev);

  // Gamma(shape, scale) via Marsaglia-Tsang; shape < 1 boosted through
  // Gamma(shape + 1). Consumes a variable number of draws, so give each
  // logical sample its own substream when order independence matters.
  double gamma(double shape, double scale);

  // uniform integer in [0, n)
  std::uint64_t uniform_index(std::uint64_t n);

  // independent stream derived from (key, index); counter starts at 0
  RandomStream substream(std::uint64_t index) const;

private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace powerpost

#endif
