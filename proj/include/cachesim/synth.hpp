#pragma once

#include <cstdint>
#include <vector>

namespace cachesim::synth {

// Paired workload: `pairs` address pairs (a_i directly followed by b_i),
// replayed in a fixed order for `occurrences` rounds, so consecutive
// occurrences of a pair are separated by the whole round. Addresses are drawn
// from a strided pool and deterministically shuffled so pairs are not
// spatially adjacent.
struct PairedSpec {
  size_t pairs = 1000;
  size_t occurrences = 5;  // times each pair appears in total
  uint64_t seed = 1;
  uint64_t addr_base = 1'000'000;
  uint64_t addr_stride = 7919;
};
std::vector<uint64_t> paired(const PairedSpec& spec);

// start, start+1, ..., start+length-1.
std::vector<uint64_t> sequential(size_t length, uint64_t start = 1);

// Several sequential streams at widely separated bases, interleaved by a
// seeded draw.
struct InterleavedSpec {
  size_t streams = 4;
  size_t length = 100000;  // total requests
  uint64_t seed = 1;
  uint64_t stream_gap = 1'000'000;  // base address spacing between streams
};
std::vector<uint64_t> interleaved(const InterleavedSpec& spec);

}  // namespace cachesim::synth
