#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cachesim/cache.hpp"

namespace cachesim {

// Knobs for the adaptive multi-stream sequential prefetcher. The published
// algorithm leaves these unspecified; the values here are working
// approximations and are surfaced in simulation reports.
struct AmpConfig {
  size_t stream_table_size = 64;
  uint32_t seq_threshold = 2;   // consecutive addresses before a stream forms
  uint32_t initial_degree = 4;  // p0
  uint32_t max_degree = 64;     // p_max

  void validate() const;
};

// Detects sequential streams and prefetches ahead of each with an adaptive
// degree: a demand miss inside a stream's prefetched range grows the degree
// (the system had to wait), an unused prefetched block evicted from the cache
// shrinks it.
class AmpPrefetcher {
 public:
  struct Stream {
    uint64_t last_addr = 0;
    uint64_t frontier = 0;  // highest prefetched address
    uint32_t degree = 0;    // p
    uint32_t run_len = 0;
    bool active = false;
    bool valid = false;
    uint64_t tick = 0;  // last use, for stream-table replacement
  };

  explicit AmpPrefetcher(AmpConfig cfg = {});

  // Returns the addresses to prefetch for this request (possibly empty).
  std::vector<uint64_t> on_request(uint64_t addr, bool hit);

  // Feed from the cache eviction hook; only untouched prefetched victims
  // inside a tracked stream shrink the degree.
  void on_eviction(const CacheEntry& victim);

  size_t metadata_bytes() const;  // fixed-size stream table

  std::span<const Stream> streams() const { return streams_; }
  const AmpConfig& config() const { return cfg_; }

 private:
  // g: the stream's trigger offset behind the frontier.
  static uint32_t trigger_gap(uint32_t degree) { return (degree + 1) / 2; }
  Stream* find_by_last(uint64_t last_addr);

  AmpConfig cfg_;
  std::vector<Stream> streams_;
  uint64_t tick_ = 0;
};

}  // namespace cachesim
