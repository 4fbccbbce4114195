#include "cachesim/cache.hpp"

#include "cachesim/errors.hpp"

namespace cachesim {

size_t CacheConfig::effective_capacity() const {
  if (capacity_blocks <= metadata_charge_blocks)
    throw ConfigError(
        "cache capacity exhausted by metadata charge: capacity_blocks=" +
        std::to_string(capacity_blocks) + ", metadata_charge_blocks=" +
        std::to_string(metadata_charge_blocks));
  return capacity_blocks - metadata_charge_blocks;
}

BlockCache::BlockCache(CacheConfig cfg)
    : cfg_(cfg), effective_capacity_(cfg.effective_capacity()) {}

LookupResult BlockCache::lookup(uint64_t addr) {
  auto it = index_.find(addr);
  if (it == index_.end()) return {};
  CacheEntry& e = *it->second;
  LookupResult result{true, e.origin == Origin::prefetch && !e.touched};
  e.touched = true;
  if (result.prefetch_first_use) e.origin = Origin::demand;
  if (cfg_.policy == Policy::lru)
    order_.splice(order_.end(), order_, it->second);
  return result;
}

std::vector<CacheEntry> BlockCache::insert(uint64_t addr, Origin origin) {
  std::vector<CacheEntry> evicted;
  if (auto it = index_.find(addr); it != index_.end()) {
    CacheEntry& e = *it->second;
    if (origin == Origin::demand) e.origin = Origin::demand;
    if (cfg_.policy == Policy::lru)
      order_.splice(order_.end(), order_, it->second);
    return evicted;
  }
  while (index_.size() >= effective_capacity_) evicted.push_back(evict_one());
  order_.push_back(CacheEntry{addr, origin, false, false});
  index_.emplace(addr, std::prev(order_.end()));
  return evicted;
}

CacheEntry BlockCache::evict_one() {
  for (;;) {
    auto victim = order_.begin();
    if (cfg_.second_chance && victim->origin == Origin::prefetch &&
        !victim->touched && !victim->second_chance_used) {
      victim->second_chance_used = true;
      order_.splice(order_.end(), order_, victim);
      ++reinsertions_;
      continue;  // eligibility consumed, so this terminates
    }
    CacheEntry out = *victim;
    index_.erase(victim->addr);
    order_.erase(victim);
    ++evictions_;
    if (hook_) hook_(out);
    return out;
  }
}

}  // namespace cachesim
