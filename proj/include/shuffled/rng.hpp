#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace shuffled {

/// Mixes a 64-bit value with the SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Stable 64-bit FNV-1a hash, used to turn stream names into tags.
std::uint64_t hash_tag(std::string_view name);

/// Derives the seed of a child stream. Children with different tags are
/// statistically independent; the mapping never changes between releases.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag);
std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag);

/// Reproducible random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Distribution sampling is done here rather than through
/// <random> distributions, which are implementation-defined:
///   - uniform(): top 53 bits of one engine draw, in [0, 1).
///   - normal(): Marsaglia polar method; the second variate of each accepted
///     pair is cached and returned by the next call.
///   - below(b): Lemire's nearly-divisionless unbiased bounded integer.
///
/// Streams are split by name (`child("noise")`) so that adding a consumer
/// never shifts the draws seen by another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  Rng child(std::string_view tag) const { return Rng(derive_seed(seed_, tag)); }
  Rng child(std::uint64_t tag) const { return Rng(derive_seed(seed_, tag)); }

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace shuffled
