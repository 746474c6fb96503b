#include "adasmooth/random.hpp"

namespace adasmooth {

std::uint64_t
mix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t
derive(std::uint64_t parent, std::uint64_t index)
{
  return mix64(parent ^ mix64(index + 0x632be59bd9b4e019ULL));
}

std::mt19937_64
seeded(std::uint64_t key)
{
  std::seed_seq seq{ static_cast<std::uint32_t>(key),
                     static_cast<std::uint32_t>(key >> 32) };
  return std::mt19937_64(seq);
}

} // namespace

RandomStream::RandomStream(std::uint64_t seed)
  : key_(mix64(seed))
  , engine_(seeded(key_))
{
}

RandomStream::RandomStream(std::uint64_t seed,
                           std::initializer_list<std::uint64_t> path)
  : key_(mix64(seed))
{
  for (auto p : path) {
    key_ = derive(key_, p);
  }
  engine_ = seeded(key_);
}

RandomStream
RandomStream::substream(std::uint64_t index) const
{
  RandomStream child(0);
  child.key_ = derive(key_, index);
  child.engine_ = seeded(child.key_);
  return child;
}

unsigned
RandomStream::poisson(double mean)
{
  std::poisson_distribution<unsigned> dist(mean);
  return dist(engine_);
}

} // namespace adasmooth
