#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace adasmooth {

//! SplitMix64 finaliser; used to derive independent substream seeds.
std::uint64_t mix64(std::uint64_t x);

//! A deterministic random stream identified by a root seed and a path of
//! stream indices (e.g. {replication, role, curve}). Streams with different
//! paths are seeded independently, so curves can be generated in any order
//! or in parallel with identical results.
class RandomStream
{
public:
  explicit RandomStream(std::uint64_t seed);
  RandomStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  //! Child stream; does not advance this stream.
  RandomStream substream(std::uint64_t index) const;

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  unsigned poisson(double mean);

  std::mt19937_64& engine() { return engine_; }
  std::uint64_t key() const { return key_; }

private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{ 0.0, 1.0 };
  std::uniform_real_distribution<double> uniform_{ 0.0, 1.0 };
};

} // namespace adasmooth
