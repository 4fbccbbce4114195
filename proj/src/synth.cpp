#include "cachesim/synth.hpp"

#include <random>
#include <utility>

namespace cachesim::synth {

// std::mt19937_64 output is pinned by the standard; draws below avoid the
// implementation-defined distributions so generated traces are bit-stable
// across toolchains.
std::vector<uint64_t> paired(const PairedSpec& spec) {
  std::vector<uint64_t> pool(2 * spec.pairs);
  for (size_t i = 0; i < pool.size(); ++i)
    pool[i] = spec.addr_base + i * spec.addr_stride;
  std::mt19937_64 rng(spec.seed);
  for (size_t i = pool.size(); i > 1; --i)
    std::swap(pool[i - 1], pool[rng() % i]);

  std::vector<uint64_t> out;
  out.reserve(pool.size() * spec.occurrences);
  for (size_t round = 0; round < spec.occurrences; ++round)
    for (size_t i = 0; i < pool.size(); ++i) out.push_back(pool[i]);
  return out;
}

std::vector<uint64_t> sequential(size_t length, uint64_t start) {
  std::vector<uint64_t> out;
  out.reserve(length);
  for (size_t i = 0; i < length; ++i) out.push_back(start + i);
  return out;
}

std::vector<uint64_t> interleaved(const InterleavedSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::vector<uint64_t> next(spec.streams);
  for (size_t s = 0; s < spec.streams; ++s)
    next[s] = 1 + s * spec.stream_gap;

  std::vector<uint64_t> out;
  out.reserve(spec.length);
  for (size_t i = 0; i < spec.length; ++i) {
    const size_t s = spec.streams > 1 ? rng() % spec.streams : 0;
    out.push_back(next[s]++);
  }
  return out;
}

}  // namespace cachesim::synth
