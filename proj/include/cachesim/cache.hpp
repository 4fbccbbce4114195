#pragma once

#include <cstdint>
#include <functional>
#include <list>
#include <unordered_map>
#include <vector>

namespace cachesim {

enum class Origin : uint8_t { demand, prefetch };
enum class Policy : uint8_t { lru, fifo };

struct CacheEntry {
  uint64_t addr = 0;
  Origin origin = Origin::demand;
  bool touched = false;             // hit since insertion
  bool second_chance_used = false;  // at most one reinsertion per residency
};

struct CacheConfig {
  size_t capacity_blocks = 0;
  Policy policy = Policy::lru;
  bool second_chance = true;
  // Reserved blocks (prefetcher metadata charged against the cache); reduces
  // the capacity available for data.
  size_t metadata_charge_blocks = 0;

  // capacity_blocks - metadata_charge_blocks; throws ConfigError when < 1.
  size_t effective_capacity() const;
};

struct LookupResult {
  bool hit = false;
  // The hit consumed a prefetched entry that had not been demanded before.
  bool prefetch_first_use = false;
};

// Invoked once per true eviction, after second-chance resolution. The hook
// must not call back into the cache.
using EvictionHook = std::function<void(const CacheEntry&)>;

// Capacity-bounded block cache with LRU or FIFO replacement. Prefetched
// entries that are about to be evicted untouched get one reinsertion at the
// MRU end (queue tail for FIFO) when second_chance is enabled.
class BlockCache {
 public:
  explicit BlockCache(CacheConfig cfg);

  // On hit: marks the entry touched and, for LRU, refreshes recency. A first
  // demand hit on a prefetched entry upgrades its origin to demand. On miss:
  // no state change.
  LookupResult lookup(uint64_t addr);

  // Inserts addr at the MRU end / queue tail and returns the truly evicted
  // entries. Re-inserting a resident addr only refreshes recency and, for a
  // demand insert, upgrades the origin.
  std::vector<CacheEntry> insert(uint64_t addr, Origin origin);

  void set_eviction_hook(EvictionHook hook) { hook_ = std::move(hook); }

  bool contains(uint64_t addr) const { return index_.contains(addr); }
  size_t size() const { return index_.size(); }
  size_t effective_capacity() const { return effective_capacity_; }
  uint64_t evictions() const { return evictions_; }
  uint64_t second_chance_reinsertions() const { return reinsertions_; }

 private:
  using EntryList = std::list<CacheEntry>;

  CacheEntry evict_one();

  CacheConfig cfg_;
  size_t effective_capacity_;
  EntryList order_;  // front = next victim, back = MRU / queue tail
  std::unordered_map<uint64_t, EntryList::iterator> index_;
  EvictionHook hook_;
  uint64_t evictions_ = 0;
  uint64_t reinsertions_ = 0;
};

}  // namespace cachesim
