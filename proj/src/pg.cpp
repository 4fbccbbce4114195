#include "cachesim/pg.hpp"

#include <algorithm>

#include "cachesim/errors.hpp"

namespace cachesim {

void PgConfig::validate() const {
  if (window < 1) throw ConfigError("pg: window must be >= 1");
  if (prob_threshold <= 0.0 || prob_threshold > 1.0)
    throw ConfigError("pg: prob_threshold must be in (0, 1]");
  if (max_prefetch < 1) throw ConfigError("pg: max_prefetch must be >= 1");
  if (max_metadata_fraction <= 0.0 || max_metadata_fraction >= 1.0)
    throw ConfigError("pg: max_metadata_fraction must be in (0, 1)");
}

PgPrefetcher::PgPrefetcher(PgConfig cfg, uint64_t cache_bytes) : cfg_(cfg) {
  cfg_.validate();
  budget_ = static_cast<uint64_t>(cfg_.max_metadata_fraction *
                                  static_cast<double>(cache_bytes));
}

void PgPrefetcher::drop_node(uint64_t addr) {
  auto it = graph_.find(addr);
  bytes_ -= kNodeBytes + kArcBytes * it->second.succ.size();
  lru_.erase(it->second.lru_pos);
  graph_.erase(it);
}

bool PgPrefetcher::reserve(size_t need, uint64_t keep) {
  while (bytes_ + need > budget_) {
    uint64_t victim = 0;
    bool found = false;
    for (uint64_t a : lru_) {
      if (a != keep) {
        victim = a;
        found = true;
        break;
      }
    }
    if (!found) return false;
    drop_node(victim);
  }
  return true;
}

void PgPrefetcher::bump(uint64_t pred, uint64_t succ) {
  auto it = graph_.find(pred);
  if (it == graph_.end()) {
    if (!reserve(kNodeBytes + kArcBytes, pred)) return;
    it = graph_.emplace(pred, Node{}).first;
    lru_.push_back(pred);
    it->second.lru_pos = std::prev(lru_.end());
    bytes_ += kNodeBytes;
  }
  Node& node = it->second;
  lru_.splice(lru_.end(), lru_, node.lru_pos);

  for (auto& [block, count] : node.succ) {
    if (block == succ) {
      ++count;
      ++node.total;
      return;
    }
  }
  if (!reserve(kArcBytes, pred)) return;
  node.succ.emplace_back(succ, 1);
  ++node.total;
  bytes_ += kArcBytes;
}

std::vector<uint64_t> PgPrefetcher::on_request(uint64_t addr) {
  // Each distinct predecessor in the window counts once; a block is not its
  // own predecessor.
  std::vector<uint64_t> seen;
  for (uint64_t q : window_) {
    if (q == addr) continue;
    if (std::find(seen.begin(), seen.end(), q) != seen.end()) continue;
    seen.push_back(q);
    bump(q, addr);
  }
  window_.push_back(addr);
  if (window_.size() > cfg_.window) window_.pop_front();

  auto it = graph_.find(addr);
  if (it == graph_.end() || it->second.total == 0) return {};
  auto ranked = it->second.succ;
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<uint64_t> out;
  const double total = static_cast<double>(it->second.total);
  for (const auto& [block, count] : ranked) {
    if (out.size() == cfg_.max_prefetch) break;
    if (static_cast<double>(count) / total < cfg_.prob_threshold) break;
    out.push_back(block);
  }
  return out;
}

std::vector<std::pair<uint64_t, uint32_t>> PgPrefetcher::successors(
    uint64_t addr) const {
  auto it = graph_.find(addr);
  if (it == graph_.end()) return {};
  auto ranked = it->second.succ;
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return ranked;
}

}  // namespace cachesim
