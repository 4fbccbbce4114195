#include "cachesim/mithril.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <numeric>
#include <string>

namespace cachesim {

void MithrilConfig::validate() const {
  if (min_support < 1 || min_support > max_support ||
      max_support > kMaxRowCapacity)
    throw ConfigError("mithril: need 1 <= min_support <= max_support <= " +
                      std::to_string(kMaxRowCapacity));
  if (lookahead < 1) throw ConfigError("mithril: lookahead must be >= 1");
  if (prefetch_list_size < 1)
    throw ConfigError("mithril: prefetch_list_size must be >= 1");
  if (max_metadata_fraction <= 0.0 || max_metadata_fraction >= 1.0)
    throw ConfigError("mithril: max_metadata_fraction must be in (0, 1)");
  if (recording_table_rows < 1 || mining_table_rows < 1)
    throw ConfigError("mithril: table sizes must be >= 1");
}

// ---------------------------------------------------------------------------
// TimestampTable

TimestampTable::TimestampTable(size_t rows, uint32_t ts_capacity)
    : rows_(rows),
      cap_(ts_capacity),
      wpr_(words_for(ts_capacity)),
      words_(rows * wpr_, 0),
      owner_(rows, 0) {
  if (ts_capacity < 1 || ts_capacity > kMaxRowCapacity)
    throw ConfigError("timestamp row capacity must be in [1, 15]");
}

void TimestampTable::append(size_t slot, uint16_t ts15) {
  const uint32_t c = count(slot);
  assert(c < cap_);
  words_[slot * wpr_ + c / 4] |= static_cast<uint64_t>(ts15) << (15 * (c % 4));
  uint64_t& w0 = words_[slot * wpr_];
  w0 = (w0 & ~(0xfull << 60)) | (static_cast<uint64_t>(c + 1) << 60);
}

void TimestampTable::clear_slot(size_t slot) {
  std::fill_n(words_.begin() + static_cast<ptrdiff_t>(slot * wpr_), wpr_, 0);
  owner_[slot] = 0;
}

void TimestampTable::move_row(size_t from, size_t to) {
  if (from == to) return;
  std::copy_n(words_.begin() + static_cast<ptrdiff_t>(from * wpr_), wpr_,
              words_.begin() + static_cast<ptrdiff_t>(to * wpr_));
  owner_[to] = owner_[from];
  clear_slot(from);
}

// ---------------------------------------------------------------------------
// RecordingTable

RecordingTable::RecordingTable(size_t rows, uint32_t row_capacity)
    : t_(rows, row_capacity), prev_(rows, -1), next_(rows, -1) {}

std::optional<size_t> RecordingTable::find(uint64_t addr) const {
  auto it = index_.find(addr);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void RecordingTable::link_tail(size_t slot) {
  const auto s = static_cast<int64_t>(slot);
  prev_[slot] = tail_;
  next_[slot] = -1;
  if (tail_ >= 0)
    next_[static_cast<size_t>(tail_)] = s;
  else
    head_ = s;
  tail_ = s;
}

void RecordingTable::unlink(size_t slot) {
  const int64_t p = prev_[slot], n = next_[slot];
  if (p >= 0)
    next_[static_cast<size_t>(p)] = n;
  else
    head_ = n;
  if (n >= 0)
    prev_[static_cast<size_t>(n)] = p;
  else
    tail_ = p;
  prev_[slot] = next_[slot] = -1;
}

size_t RecordingTable::insert(uint64_t addr) {
  size_t slot;
  if (used_ == t_.rows()) {
    slot = static_cast<size_t>(head_);  // FIFO-oldest row is overwritten
    index_.erase(t_.owner(slot));
    unlink(slot);
    t_.clear_slot(slot);
  } else {
    slot = used_++;
  }
  t_.set_owner(slot, addr);
  index_.emplace(addr, slot);
  link_tail(slot);
  return slot;
}

void RecordingTable::remove(size_t slot) {
  index_.erase(t_.owner(slot));
  unlink(slot);
  const size_t last = used_ - 1;
  if (slot != last) {
    // Pull the last occupied slot into the hole; its FIFO node moves with it.
    t_.move_row(last, slot);
    index_[t_.owner(slot)] = slot;
    const int64_t p = prev_[last], n = next_[last];
    prev_[slot] = p;
    next_[slot] = n;
    const auto s = static_cast<int64_t>(slot);
    if (p >= 0)
      next_[static_cast<size_t>(p)] = s;
    else
      head_ = s;
    if (n >= 0)
      prev_[static_cast<size_t>(n)] = s;
    else
      tail_ = s;
    prev_[last] = next_[last] = -1;
  } else {
    t_.clear_slot(slot);
  }
  --used_;
}

// ---------------------------------------------------------------------------
// MiningTable

MiningTable::MiningTable(size_t rows, uint32_t row_capacity)
    : t_(rows, row_capacity) {}

std::optional<size_t> MiningTable::find(uint64_t addr) const {
  auto it = index_.find(addr);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

size_t MiningTable::add_row(uint64_t addr) {
  assert(!full());
  const size_t slot = used_++;
  t_.set_owner(slot, addr);
  index_.emplace(addr, slot);
  return slot;
}

void MiningTable::clear() {
  for (size_t slot = 0; slot < used_; ++slot) t_.clear_slot(slot);
  index_.clear();
  used_ = 0;
}

// ---------------------------------------------------------------------------
// PrefetchTable

PrefetchTable::PrefetchTable(uint32_t prefetch_list_size, size_t max_shards)
    : p_(prefetch_list_size), max_shards_(max_shards) {}

std::optional<size_t> PrefetchTable::allocate_row() {
  const size_t cap = max_shards_ * kRowsPerShard;
  if (next_row_ < cap) {
    if (next_row_ == shards_.size() * kRowsPerShard) {
      const size_t cells = kRowsPerShard * (1 + p_);
      auto shard = std::make_unique<uint64_t[]>(cells);
      std::fill_n(shard.get(), cells, kNoBlock);
      shards_.push_back(std::move(shard));
    }
    return next_row_++;
  }
  if (cap == 0) return std::nullopt;
  const size_t id = recycle_;  // globally oldest row
  recycle_ = (recycle_ + 1) % cap;
  return id;
}

void PrefetchTable::add(uint64_t src, uint64_t dst) {
  if (src == dst || src == kNoBlock || dst == kNoBlock) return;
  size_t id;
  if (auto it = index_.find(src); it != index_.end()) {
    id = it->second;
  } else {
    auto slot = allocate_row();
    if (!slot) return;  // no shard budget at all
    id = *slot;
    uint64_t* r = row(id);
    if (r[0] != kNoBlock) index_.erase(r[0]);  // recycled row
    std::fill_n(r, 1 + p_, kNoBlock);
    r[0] = src;
    index_.emplace(src, id);
  }
  uint64_t* assoc = row(id) + 1;
  uint32_t n = 0;
  while (n < p_ && assoc[n] != kNoBlock) ++n;
  for (uint32_t k = 0; k < n; ++k)
    if (assoc[k] == dst) return;  // already present
  if (n == p_) {
    std::move(assoc + 1, assoc + p_, assoc);  // drop oldest
    assoc[p_ - 1] = dst;
  } else {
    assoc[n] = dst;
  }
}

std::vector<uint64_t> PrefetchTable::lookup(uint64_t src) const {
  auto it = index_.find(src);
  if (it == index_.end()) return {};
  const uint64_t* assoc = row(it->second) + 1;
  std::vector<uint64_t> out;
  for (uint32_t k = 0; k < p_ && assoc[k] != kNoBlock; ++k)
    out.push_back(assoc[k]);
  return out;
}

// ---------------------------------------------------------------------------
// Mining

bool check_association(std::span<const uint16_t> a, std::span<const uint16_t> b,
                       AssocKind kind, uint32_t delta) {
  if (a.size() != b.size()) return false;
  bool consecutive = false;
  for (size_t k = 0; k < a.size(); ++k) {
    const uint32_t d = static_cast<uint32_t>(std::abs(ts_diff(a[k], b[k])));
    if (d > delta) return false;
    if (d == 1) consecutive = true;
  }
  return kind == AssocKind::weak || consecutive;
}

std::vector<Association> mine_rows(std::span<const MiningRow> rows,
                                   uint32_t min_support, uint32_t delta,
                                   uint64_t now) {
  // Anchor just past `now`: any timestamp within the last 2^15 events maps to
  // its true order.
  const uint32_t anchor = (compress_ts(now) + 1u) & (kTimestampMod - 1);
  auto sort_key = [&](size_t i) {
    return (static_cast<uint32_t>(rows[i].ts.front()) - anchor) &
           (kTimestampMod - 1);
  };

  std::vector<size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return sort_key(a) < sort_key(b); });

  std::vector<Association> out;
  for (size_t i = 0; i < order.size(); ++i) {
    const MiningRow& ri = rows[order[i]];
    if (ri.ts.size() < min_support) continue;
    AssocKind need = AssocKind::weak;
    for (size_t j = i + 1; j < order.size(); ++j) {
      const MiningRow& rj = rows[order[j]];
      if (check_association(ri.ts, rj.ts, need, delta)) {
        out.push_back({ri.addr, rj.addr});
        out.push_back({rj.addr, ri.addr});
        need = AssocKind::strong;
      }
      if (sort_key(order[j]) - sort_key(order[i]) > delta) break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// MithrilEngine

uint64_t MithrilEngine::compute_budget(const MithrilConfig& cfg,
                                       uint64_t cache_bytes) {
  cfg.validate();
  const auto budget = static_cast<uint64_t>(cfg.max_metadata_fraction *
                                            static_cast<double>(cache_bytes));
  const size_t fixed = fixed_metadata_bytes(cfg);
  if (fixed > budget)
    throw ConfigError(
        "mithril: recording/mining tables (" + std::to_string(fixed) +
        " bytes) exceed the metadata budget (" + std::to_string(budget) +
        " bytes)");
  return budget;
}

size_t MithrilEngine::max_shards_from_budget() const {
  return (budget_ - fixed_metadata_bytes(cfg_)) /
         PrefetchTable::shard_bytes(cfg_.prefetch_list_size);
}

size_t MithrilEngine::metadata_bytes_for(const MithrilConfig& cfg,
                                         size_t shards) {
  const size_t rec =
      cfg.recording_table_rows * TimestampTable::words_for(cfg.min_support) * 8;
  const size_t min =
      cfg.mining_table_rows * TimestampTable::words_for(cfg.max_support) * 8;
  const size_t index =
      12 * (cfg.recording_table_rows + cfg.mining_table_rows);
  return rec + min + index +
         shards * PrefetchTable::shard_bytes(cfg.prefetch_list_size);
}

MithrilEngine::MithrilEngine(MithrilConfig cfg, uint64_t cache_bytes)
    : cfg_(cfg),
      budget_(compute_budget(cfg, cache_bytes)),
      rec_(cfg.recording_table_rows, cfg.min_support),
      min_(cfg.mining_table_rows, cfg.max_support),
      pf_(cfg.prefetch_list_size, max_shards_from_budget()) {}

std::vector<uint64_t> MithrilEngine::handle(uint64_t addr, bool hit) {
  const RecordingMode mode = cfg_.recording_mode;
  const bool record_now =
      mode == RecordingMode::every_request ||
      ((mode == RecordingMode::miss_only ||
        mode == RecordingMode::miss_and_evict) &&
       !hit);
  if (record_now) record(addr);
  return pf_.lookup(addr);
}

void MithrilEngine::on_eviction(uint64_t addr) {
  if (cfg_.recording_mode == RecordingMode::evict_only ||
      cfg_.recording_mode == RecordingMode::miss_and_evict)
    record(addr);
}

void MithrilEngine::record(uint64_t addr) {
  const uint16_t ts = compress_ts(clock_);
  if (auto m = min_.find(addr)) {
    // Beyond max_support the block is frequent; the event is dropped.
    if (min_.count(*m) < cfg_.max_support) min_.append(*m, ts);
  } else {
    size_t slot;
    if (auto r = rec_.find(addr))
      slot = *r;
    else
      slot = rec_.insert(addr);
    rec_.append(slot, ts);
    if (rec_.count(slot) >= cfg_.min_support) migrate(addr, slot);
  }
  ++clock_;
}

void MithrilEngine::migrate(uint64_t addr, size_t rec_slot) {
  const size_t m = min_.add_row(addr);
  for (uint32_t k = 0; k < rec_.count(rec_slot); ++k)
    min_.append(m, rec_.ts(rec_slot, k));
  rec_.remove(rec_slot);
  if (min_.full()) {
    run_mining();
    min_.clear();
  }
}

void MithrilEngine::run_mining() {
  std::vector<MiningRow> snapshot;
  snapshot.reserve(min_.occupied());
  for (size_t slot = 0; slot < min_.occupied(); ++slot) {
    MiningRow row;
    row.addr = min_.owner(slot);
    row.ts.reserve(min_.count(slot));
    for (uint32_t k = 0; k < min_.count(slot); ++k)
      row.ts.push_back(min_.ts(slot, k));
    snapshot.push_back(std::move(row));
  }
  for (const Association& a :
       mine_rows(snapshot, cfg_.min_support, cfg_.lookahead, clock_))
    pf_.add(a.src, a.dst);
  ++mining_runs_;
}

}  // namespace cachesim
