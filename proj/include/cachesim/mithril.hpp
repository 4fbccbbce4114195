#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "cachesim/errors.hpp"

namespace cachesim {

enum class RecordingMode : uint8_t {
  miss_only,
  every_request,
  evict_only,
  miss_and_evict,
};

struct MithrilConfig {
  uint32_t min_support = 4;         // R: occupancy that makes a row mining-ready
  uint32_t max_support = 8;         // S: beyond this a block is frequent, ignored
  uint32_t lookahead = 50;          // max logical-time distance for association
  uint32_t prefetch_list_size = 2;  // P: associations kept per source block
  double max_metadata_fraction = 0.10;  // metadata budget / cache bytes
  size_t recording_table_rows = 100000;
  size_t mining_table_rows = 1250;
  RecordingMode recording_mode = RecordingMode::miss_only;

  void validate() const;
};

// Logical timestamps are stored compressed to their low 15 bits; four per
// 64-bit word, with the row occupancy count in the top 4 bits of word 0
// (which caps row capacity at 15).
inline constexpr uint32_t kTimestampBits = 15;
inline constexpr uint32_t kTimestampMod = 1u << kTimestampBits;  // 32768
inline constexpr uint32_t kMaxRowCapacity = 15;

constexpr uint16_t compress_ts(uint64_t ts) {
  return static_cast<uint16_t>(ts & (kTimestampMod - 1));
}

// Signed minimal distance (a - b) between compressed timestamps, the
// representative of (a - b) mod 2^15 in [-16384, 16383].
constexpr int32_t ts_diff(uint16_t a, uint16_t b) {
  const uint32_t d = (static_cast<uint32_t>(a) - b) & (kTimestampMod - 1);
  return d >= kTimestampMod / 2 ? static_cast<int32_t>(d) - static_cast<int32_t>(kTimestampMod)
                                : static_cast<int32_t>(d);
}

// Fixed table of bit-packed timestamp rows, each holding up to ts_capacity
// compressed timestamps in append order. The owner address lives beside the
// packed words; metadata accounting charges it through the 12-byte index
// entries, not here.
class TimestampTable {
 public:
  TimestampTable(size_t rows, uint32_t ts_capacity);

  uint32_t count(size_t slot) const {
    return static_cast<uint32_t>(words_[slot * wpr_] >> 60);
  }
  uint16_t ts(size_t slot, uint32_t k) const {
    return static_cast<uint16_t>(
        (words_[slot * wpr_ + k / 4] >> (15 * (k % 4))) & (kTimestampMod - 1));
  }
  void append(size_t slot, uint16_t ts15);
  void clear_slot(size_t slot);
  void move_row(size_t from, size_t to);  // clears `from`

  uint64_t owner(size_t slot) const { return owner_[slot]; }
  void set_owner(size_t slot, uint64_t addr) { owner_[slot] = addr; }

  size_t rows() const { return rows_; }
  uint32_t ts_capacity() const { return cap_; }
  size_t words_per_row() const { return wpr_; }
  size_t table_bytes() const { return rows_ * wpr_ * 8; }

  static size_t words_for(uint32_t ts_capacity) {
    return (ts_capacity + 3) / 4;
  }

 private:
  size_t rows_;
  uint32_t cap_;
  size_t wpr_;
  std::vector<uint64_t> words_;
  std::vector<uint64_t> owner_;
};

// Fixed-size table of partial rows awaiting min_support timestamps. Occupied
// slots form a dense prefix; whole-row replacement is FIFO by insertion order
// once full, and removing a migrated row pulls the last occupied slot into
// the hole.
class RecordingTable {
 public:
  RecordingTable(size_t rows, uint32_t row_capacity);

  std::optional<size_t> find(uint64_t addr) const;
  // Allocates a row for addr, overwriting the FIFO-oldest row when full.
  size_t insert(uint64_t addr);
  void append(size_t slot, uint16_t ts15) { t_.append(slot, ts15); }
  // Removes slot after migration, compacting the occupied prefix.
  void remove(size_t slot);

  uint32_t count(size_t slot) const { return t_.count(slot); }
  uint16_t ts(size_t slot, uint32_t k) const { return t_.ts(slot, k); }
  uint64_t owner(size_t slot) const { return t_.owner(slot); }
  size_t occupied() const { return used_; }
  size_t capacity_rows() const { return t_.rows(); }
  size_t table_bytes() const { return t_.table_bytes(); }

 private:
  void link_tail(size_t slot);
  void unlink(size_t slot);

  TimestampTable t_;
  std::unordered_map<uint64_t, size_t> index_;
  std::vector<int64_t> prev_, next_;  // FIFO order over occupied slots
  int64_t head_ = -1, tail_ = -1;
  size_t used_ = 0;
};

// Fixed-size table of mining-ready rows; filling it triggers a mining pass,
// after which it is cleared.
class MiningTable {
 public:
  MiningTable(size_t rows, uint32_t row_capacity);

  std::optional<size_t> find(uint64_t addr) const;
  bool full() const { return used_ == t_.rows(); }
  size_t add_row(uint64_t addr);  // requires !full()
  void append(size_t slot, uint16_t ts15) { t_.append(slot, ts15); }
  void clear();

  uint32_t count(size_t slot) const { return t_.count(slot); }
  uint16_t ts(size_t slot, uint32_t k) const { return t_.ts(slot, k); }
  uint64_t owner(size_t slot) const { return t_.owner(slot); }
  size_t occupied() const { return used_; }
  size_t capacity_rows() const { return t_.rows(); }
  size_t table_bytes() const { return t_.table_bytes(); }

 private:
  TimestampTable t_;
  std::unordered_map<uint64_t, size_t> index_;
  size_t used_ = 0;
};

// Sharded fixed-width association store. Each row is [src | dst_0..dst_{P-1}]
// with destinations ordered oldest to newest; a full row drops its oldest
// destination. Shards of 2000 rows are allocated on demand up to max_shards;
// past that, rows are recycled in global allocation (FIFO) order.
class PrefetchTable {
 public:
  static constexpr size_t kRowsPerShard = 2000;
  // Free-cell sentinel; block addresses must stay below 2^64 - 1.
  static constexpr uint64_t kNoBlock = ~0ull;

  PrefetchTable(uint32_t prefetch_list_size, size_t max_shards);

  void add(uint64_t src, uint64_t dst);
  // Associations of src, oldest to newest (empty when src is unknown).
  std::vector<uint64_t> lookup(uint64_t src) const;

  size_t shards_allocated() const { return shards_.size(); }
  size_t max_shards() const { return max_shards_; }
  size_t rows_in_use() const { return index_.size(); }
  size_t bytes() const { return shards_.size() * shard_bytes(p_); }

  // Cell storage plus 12 bytes of index per row.
  static size_t shard_bytes(uint32_t prefetch_list_size) {
    return kRowsPerShard * (1 + prefetch_list_size) * 8 + kRowsPerShard * 12;
  }

  template <typename Fn>  // fn(src, dst), in row order
  void for_each(Fn&& fn) const {
    for (size_t id = 0; id < next_row_; ++id) {
      const uint64_t* r = row(id);
      if (r[0] == kNoBlock) continue;
      for (uint32_t k = 0; k < p_ && r[1 + k] != kNoBlock; ++k)
        fn(r[0], r[1 + k]);
    }
  }

 private:
  uint64_t* row(size_t id) {
    return &shards_[id / kRowsPerShard][(id % kRowsPerShard) * (1 + p_)];
  }
  const uint64_t* row(size_t id) const {
    return &shards_[id / kRowsPerShard][(id % kRowsPerShard) * (1 + p_)];
  }
  std::optional<size_t> allocate_row();

  uint32_t p_;
  size_t max_shards_;
  std::vector<std::unique_ptr<uint64_t[]>> shards_;
  std::unordered_map<uint64_t, size_t> index_;
  size_t next_row_ = 0;  // rows handed out so far, <= max_shards * 2000
  size_t recycle_ = 0;
};

enum class AssocKind { weak, strong };

// weak: equal counts and every aligned timestamp pair within delta.
// strong: weak, and at least one aligned pair at distance exactly 1.
bool check_association(std::span<const uint16_t> a, std::span<const uint16_t> b,
                       AssocKind kind, uint32_t delta);

struct MiningRow {
  uint64_t addr = 0;
  std::vector<uint16_t> ts;  // compressed, append order
};

struct Association {
  uint64_t src = 0;
  uint64_t dst = 0;
  friend bool operator==(const Association&, const Association&) = default;
};

// Scans rows sorted by first timestamp (wrap-aware, anchored at `now`; ties
// keep input order) and emits associations in discovery order, both
// directions per discovered pair. For each source row the first acceptance
// may be weak; every later acceptance must be strong. Rows with fewer than
// min_support timestamps are skipped.
std::vector<Association> mine_rows(std::span<const MiningRow> rows,
                                   uint32_t min_support, uint32_t delta,
                                   uint64_t now);

// The prefetching layer: records per-block request timestamps into the
// recording/mining tables, mines block associations when the mining table
// fills, and answers prefetch lookups from the sharded prefetching table.
class MithrilEngine {
 public:
  MithrilEngine(MithrilConfig cfg, uint64_t cache_bytes);

  // Demand-path entry point: records the event when the recording mode says
  // so, then returns the prefetch candidates for addr. The eviction-driven
  // modes are fed through on_eviction instead.
  std::vector<uint64_t> handle(uint64_t addr, bool hit);
  void on_eviction(uint64_t addr);

  // Appends one compressed timestamp for addr and advances the logical
  // clock. Events for blocks already holding max_support timestamps in the
  // mining table are dropped (the block is frequent).
  void record(uint64_t addr);

  std::vector<uint64_t> prefetch_candidates(uint64_t addr) const {
    return pf_.lookup(addr);
  }

  uint64_t logical_clock() const { return clock_; }
  uint64_t mining_runs() const { return mining_runs_; }
  uint64_t budget_bytes() const { return budget_; }

  // Current allocation: packed table words + 12-byte index entries (counted
  // at table capacity) + allocated shards.
  size_t metadata_bytes() const {
    return metadata_bytes_for(cfg_, pf_.shards_allocated());
  }
  // Upper bound with every permitted shard allocated; what the simulator
  // charges against cache capacity.
  size_t max_metadata_bytes() const {
    return metadata_bytes_for(cfg_, pf_.max_shards());
  }
  static size_t fixed_metadata_bytes(const MithrilConfig& cfg) {
    return metadata_bytes_for(cfg, 0);
  }
  static size_t metadata_bytes_for(const MithrilConfig& cfg, size_t shards);

  template <typename Fn>  // fn(src, dst) over the prefetching table
  void for_each_association(Fn&& fn) const {
    pf_.for_each(std::forward<Fn>(fn));
  }

  const MithrilConfig& config() const { return cfg_; }
  const RecordingTable& recording_table() const { return rec_; }
  const MiningTable& mining_table() const { return min_; }
  const PrefetchTable& prefetch_table() const { return pf_; }

 private:
  static uint64_t compute_budget(const MithrilConfig& cfg,
                                 uint64_t cache_bytes);
  size_t max_shards_from_budget() const;
  void migrate(uint64_t addr, size_t rec_slot);
  void run_mining();

  MithrilConfig cfg_;
  uint64_t budget_;
  RecordingTable rec_;
  MiningTable min_;
  PrefetchTable pf_;
  uint64_t clock_ = 0;
  uint64_t mining_runs_ = 0;
};

}  // namespace cachesim
