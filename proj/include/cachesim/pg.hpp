#pragma once

#include <cstdint>
#include <deque>
#include <list>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cachesim {

// Probability-graph prefetcher knobs. Window and threshold values are
// working approximations surfaced in simulation reports.
struct PgConfig {
  size_t window = 10;            // W: recent requests counted as predecessors
  double prob_threshold = 0.5;   // minimum successor probability to prefetch
  size_t max_prefetch = 2;       // decision size cap
  double max_metadata_fraction = 0.10;  // graph budget, fraction of cache bytes

  void validate() const;
};

// Directed co-occurrence graph over block addresses: every distinct block in
// the recent window gains an arc to the arriving block. Successors of the
// arriving block whose relative weight clears the threshold are prefetched.
// Graph storage is bounded; the least-recently-updated predecessor node is
// dropped (with its arcs) to make room.
class PgPrefetcher {
 public:
  PgPrefetcher(PgConfig cfg, uint64_t cache_bytes);

  std::vector<uint64_t> on_request(uint64_t addr);

  // 12 bytes per predecessor node plus 12 per arc.
  size_t metadata_bytes() const { return bytes_; }
  size_t budget_bytes() const { return budget_; }

  // Successors of addr with counts, ordered count-desc then addr-asc.
  std::vector<std::pair<uint64_t, uint32_t>> successors(uint64_t addr) const;
  const PgConfig& config() const { return cfg_; }

 private:
  struct Node {
    std::vector<std::pair<uint64_t, uint32_t>> succ;  // (block, count)
    uint64_t total = 0;
    std::list<uint64_t>::iterator lru_pos;
  };

  static constexpr size_t kNodeBytes = 12;
  static constexpr size_t kArcBytes = 12;

  void bump(uint64_t pred, uint64_t succ);
  bool reserve(size_t need, uint64_t keep);
  void drop_node(uint64_t addr);

  PgConfig cfg_;
  uint64_t budget_;
  std::deque<uint64_t> window_;
  std::unordered_map<uint64_t, Node> graph_;
  std::list<uint64_t> lru_;  // front = least recently updated predecessor
  size_t bytes_ = 0;
};

}  // namespace cachesim
