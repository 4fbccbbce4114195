#include "cachesim/amp.hpp"

#include <algorithm>

#include "cachesim/errors.hpp"

namespace cachesim {

void AmpConfig::validate() const {
  if (stream_table_size < 1)
    throw ConfigError("amp: stream_table_size must be >= 1");
  if (seq_threshold < 1) throw ConfigError("amp: seq_threshold must be >= 1");
  if (initial_degree < 1 || initial_degree > max_degree)
    throw ConfigError("amp: need 1 <= initial_degree <= max_degree");
}

AmpPrefetcher::AmpPrefetcher(AmpConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  streams_.resize(cfg_.stream_table_size);
}

AmpPrefetcher::Stream* AmpPrefetcher::find_by_last(uint64_t last_addr) {
  for (Stream& s : streams_)
    if (s.valid && s.last_addr == last_addr) return &s;
  return nullptr;
}

std::vector<uint64_t> AmpPrefetcher::on_request(uint64_t addr, bool hit) {
  ++tick_;
  std::vector<uint64_t> out;

  if (Stream* s = addr > 0 ? find_by_last(addr - 1) : nullptr) {
    s->last_addr = addr;
    s->tick = tick_;
    if (!s->active) {
      if (++s->run_len >= cfg_.seq_threshold) {
        // Stream forms; prefetching starts once it advances past the trigger.
        s->active = true;
        s->frontier = addr;
      }
      return out;
    }
    if (!hit && addr <= s->frontier)
      s->degree = std::min(s->degree + 1, cfg_.max_degree);
    const uint32_t g = trigger_gap(s->degree);
    if (addr + g >= s->frontier) {
      const uint64_t base = std::max(s->frontier, addr);
      out.reserve(s->degree);
      for (uint32_t k = 1; k <= s->degree; ++k) out.push_back(base + k);
      s->frontier = base + s->degree;
    }
    return out;
  }

  if (Stream* s = find_by_last(addr)) {
    s->tick = tick_;  // repeated address, nothing to extend
    return out;
  }

  // Start a new candidate run in the stalest slot.
  Stream* slot = &streams_[0];
  for (Stream& s : streams_) {
    if (!s.valid) {
      slot = &s;
      break;
    }
    if (s.tick < slot->tick) slot = &s;
  }
  *slot = Stream{addr,
                 addr,
                 cfg_.initial_degree,
                 1,
                 cfg_.seq_threshold <= 1,
                 true,
                 tick_};
  return out;
}

void AmpPrefetcher::on_eviction(const CacheEntry& victim) {
  if (victim.origin != Origin::prefetch || victim.touched) return;
  for (Stream& s : streams_) {
    if (s.valid && s.active && victim.addr > s.last_addr &&
        victim.addr <= s.frontier) {
      s.degree = std::max(s.degree - 1, 1u);
      return;
    }
  }
}

size_t AmpPrefetcher::metadata_bytes() const {
  return streams_.size() * sizeof(Stream);
}

}  // namespace cachesim
