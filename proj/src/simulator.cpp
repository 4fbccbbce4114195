#include "cachesim/simulator.hpp"

#include <algorithm>
#include <future>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "cachesim/errors.hpp"

#include "json.hpp"

namespace cachesim {

void StackConfig::validate() const {
  if (cache.capacity_blocks < 1)
    throw ConfigError("stack: cache capacity_blocks must be >= 1");
  if (block_size < 1) throw ConfigError("stack: block_size must be >= 1");
  if (amp && pg)
    throw ConfigError("stack: at most one baseline prefetcher (amp or pg)");
}

namespace {

constexpr uint64_t ceil_div(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

const char* policy_name(Policy p) { return p == Policy::lru ? "lru" : "fifo"; }

const char* mode_name(RecordingMode m) {
  switch (m) {
    case RecordingMode::miss_only: return "miss_only";
    case RecordingMode::every_request: return "every_request";
    case RecordingMode::evict_only: return "evict_only";
    case RecordingMode::miss_and_evict: return "miss_and_evict";
  }
  return "?";
}

std::map<std::string, std::string> echo_config(const StackConfig& s,
                                               size_t charge_blocks) {
  std::map<std::string, std::string> c;
  c["cache.capacity_blocks"] = std::to_string(s.cache.capacity_blocks);
  c["cache.policy"] = policy_name(s.cache.policy);
  c["cache.second_chance"] = s.cache.second_chance ? "true" : "false";
  c["cache.metadata_charge_blocks"] = std::to_string(charge_blocks);
  c["block_size"] = std::to_string(s.block_size);
  if (s.mithril) {
    const MithrilConfig& m = *s.mithril;
    c["mithril.min_support"] = std::to_string(m.min_support);
    c["mithril.max_support"] = std::to_string(m.max_support);
    c["mithril.lookahead"] = std::to_string(m.lookahead);
    c["mithril.prefetch_list_size"] = std::to_string(m.prefetch_list_size);
    c["mithril.max_metadata_fraction"] = std::to_string(m.max_metadata_fraction);
    c["mithril.recording_table_rows"] = std::to_string(m.recording_table_rows);
    c["mithril.mining_table_rows"] = std::to_string(m.mining_table_rows);
    c["mithril.recording_mode"] = mode_name(m.recording_mode);
  } else {
    c["mithril"] = "none";
  }
  if (s.amp) {
    c["baseline"] = "amp";
    c["amp.stream_table_size"] = std::to_string(s.amp->stream_table_size);
    c["amp.seq_threshold"] = std::to_string(s.amp->seq_threshold);
    c["amp.initial_degree"] = std::to_string(s.amp->initial_degree);
    c["amp.max_degree"] = std::to_string(s.amp->max_degree);
  } else if (s.pg) {
    c["baseline"] = "pg";
    c["pg.window"] = std::to_string(s.pg->window);
    c["pg.prob_threshold"] = std::to_string(s.pg->prob_threshold);
    c["pg.max_prefetch"] = std::to_string(s.pg->max_prefetch);
    c["pg.max_metadata_fraction"] = std::to_string(s.pg->max_metadata_fraction);
  } else {
    c["baseline"] = "none";
  }
  return c;
}

enum class Layer { mithril, baseline };

struct BlockTally {
  uint64_t frequency = 0;
  uint64_t hit_count = 0;
};

}  // namespace

SimulationReport run(TraceReader& trace, const StackConfig& stack,
                     const RunOutputs& outputs) {
  stack.validate();
  if (outputs.associations && !stack.mithril)
    throw ConfigError("association dump requires the mithril layer");

  const uint64_t cache_bytes =
      static_cast<uint64_t>(stack.cache.capacity_blocks) * stack.block_size;

  std::optional<MithrilEngine> mithril;
  std::optional<AmpPrefetcher> amp;
  std::optional<PgPrefetcher> pg;
  size_t metadata_max = 0;
  if (stack.mithril) {
    mithril.emplace(*stack.mithril, cache_bytes);
    metadata_max += mithril->max_metadata_bytes();
  }
  if (stack.amp) {
    amp.emplace(*stack.amp);
    metadata_max += amp->metadata_bytes();
  }
  if (stack.pg) {
    pg.emplace(*stack.pg, cache_bytes);
    metadata_max += pg->budget_bytes();
  }

  CacheConfig cache_cfg = stack.cache;
  cache_cfg.metadata_charge_blocks +=
      static_cast<size_t>(ceil_div(metadata_max, stack.block_size));
  BlockCache cache(cache_cfg);

  SimulationReport report;
  report.capacity_blocks = cache_cfg.capacity_blocks;
  report.effective_capacity_blocks = cache.effective_capacity();
  report.metadata_charge_blocks = cache_cfg.metadata_charge_blocks;
  report.metadata_bytes = metadata_max;
  report.config = echo_config(stack, cache_cfg.metadata_charge_blocks);

  std::unordered_set<uint64_t> seen;
  std::unordered_map<uint64_t, Layer> pending_prefetch;
  std::unordered_map<uint64_t, BlockTally> tally;

  cache.set_eviction_hook([&](const CacheEntry& victim) {
    if (victim.origin == Origin::prefetch) pending_prefetch.erase(victim.addr);
    if (mithril) mithril->on_eviction(victim.addr);
    if (amp) amp->on_eviction(victim);
  });

  auto insert_prefetches = [&](const std::vector<uint64_t>& decision,
                               Layer layer) {
    uint64_t& issued = layer == Layer::mithril ? report.mithril_issued
                                               : report.baseline_issued;
    uint64_t& inserted = layer == Layer::mithril ? report.mithril_inserted
                                                 : report.baseline_inserted;
    for (uint64_t block : decision) {
      ++issued;
      ++report.prefetches_issued;
      if (cache.contains(block)) continue;
      cache.insert(block, Origin::prefetch);
      ++inserted;
      ++report.prefetches_inserted;
      pending_prefetch[block] = layer;
    }
  };

  while (auto req = trace.next()) {
    const uint64_t addr = req->addr;
    ++report.requests;

    const LookupResult lr = cache.lookup(addr);
    if (lr.hit) {
      ++report.hits;
      if (lr.prefetch_first_use) {
        ++report.prefetched_used;
        auto it = pending_prefetch.find(addr);
        if (it != pending_prefetch.end()) {
          (it->second == Layer::mithril ? report.mithril_used
                                        : report.baseline_used)++;
          pending_prefetch.erase(it);
        }
      }
    } else {
      ++report.misses;
      if (seen.insert(addr).second) ++report.cold_misses;
      cache.insert(addr, Origin::demand);
    }

    if (outputs.block_stats) {
      BlockTally& t = tally[addr];
      ++t.frequency;
      if (lr.hit) ++t.hit_count;
    }

    if (mithril) insert_prefetches(mithril->handle(addr, lr.hit), Layer::mithril);
    if (amp) insert_prefetches(amp->on_request(addr, lr.hit), Layer::baseline);
    if (pg) insert_prefetches(pg->on_request(addr), Layer::baseline);
  }

  report.evictions = cache.evictions();
  report.second_chance_reinsertions = cache.second_chance_reinsertions();
  if (mithril) {
    report.mining_runs = mithril->mining_runs();
    if (mithril->metadata_bytes() > mithril->budget_bytes())
      throw InvariantViolation("mithril metadata exceeded its budget");
  }
  if (pg && pg->metadata_bytes() > pg->budget_bytes())
    throw InvariantViolation("pg metadata exceeded its budget");

  if (outputs.block_stats) {
    outputs.block_stats->clear();
    outputs.block_stats->reserve(tally.size());
    for (const auto& [addr, t] : tally)
      outputs.block_stats->push_back({addr, t.frequency, t.hit_count});
    std::sort(outputs.block_stats->begin(), outputs.block_stats->end(),
              [](const BlockStats& a, const BlockStats& b) {
                return a.frequency != b.frequency ? a.frequency > b.frequency
                                                  : a.addr < b.addr;
              });
  }
  if (outputs.associations) {
    outputs.associations->clear();
    mithril->for_each_association([&](uint64_t src, uint64_t dst) {
      outputs.associations->push_back({src, dst});
    });
  }
  return report;
}

std::vector<SimulationReport> sweep(const TraceFactory& trace_factory,
                                    std::span<const size_t> sizes_blocks,
                                    const StackConfig& base) {
  if (sizes_blocks.empty())
    throw ConfigError("sweep: size list must not be empty");
  for (size_t i = 1; i < sizes_blocks.size(); ++i)
    if (sizes_blocks[i] <= sizes_blocks[i - 1])
      throw ConfigError("sweep: sizes must be strictly increasing");

  std::vector<std::future<SimulationReport>> futures;
  futures.reserve(sizes_blocks.size());
  for (size_t size : sizes_blocks) {
    futures.push_back(std::async(std::launch::async, [&trace_factory, &base,
                                                      size]() {
      StackConfig stack = base;
      stack.cache.capacity_blocks = size;
      auto reader = trace_factory();
      return run(*reader, stack);
    }));
  }
  std::vector<SimulationReport> reports;
  reports.reserve(futures.size());
  for (auto& f : futures) reports.push_back(f.get());
  return reports;
}

std::vector<BlockStats> analyze_hit_frequency(TraceReader& trace,
                                              const StackConfig& stack) {
  std::vector<BlockStats> rows;
  RunOutputs outputs;
  outputs.block_stats = &rows;
  run(trace, stack, outputs);
  return rows;
}

std::string SimulationReport::csv_header() {
  return "capacity_blocks,effective_capacity_blocks,requests,hits,misses,"
         "cold_misses,hit_ratio,max_obtainable_hit_ratio,prefetches_issued,"
         "prefetches_inserted,prefetched_used,precision,mithril_issued,"
         "mithril_inserted,mithril_used,baseline_issued,baseline_inserted,"
         "baseline_used,evictions,second_chance_reinsertions,mining_runs,"
         "metadata_bytes,metadata_charge_blocks";
}

std::string SimulationReport::csv_row() const {
  std::ostringstream os;
  os << capacity_blocks << ',' << effective_capacity_blocks << ',' << requests
     << ',' << hits << ',' << misses << ',' << cold_misses << ',' << hit_ratio()
     << ',' << max_obtainable_hit_ratio() << ',' << prefetches_issued << ','
     << prefetches_inserted << ',' << prefetched_used << ',' << precision()
     << ',' << mithril_issued << ',' << mithril_inserted << ',' << mithril_used
     << ',' << baseline_issued << ',' << baseline_inserted << ','
     << baseline_used << ',' << evictions << ',' << second_chance_reinsertions
     << ',' << mining_runs << ',' << metadata_bytes << ','
     << metadata_charge_blocks;
  return os.str();
}

std::string SimulationReport::to_json_line() const {
  nlohmann::json j;
  j["capacity_blocks"] = capacity_blocks;
  j["effective_capacity_blocks"] = effective_capacity_blocks;
  j["requests"] = requests;
  j["hits"] = hits;
  j["misses"] = misses;
  j["cold_misses"] = cold_misses;
  j["hit_ratio"] = hit_ratio();
  j["max_obtainable_hit_ratio"] = max_obtainable_hit_ratio();
  j["prefetches_issued"] = prefetches_issued;
  j["prefetches_inserted"] = prefetches_inserted;
  j["prefetched_used"] = prefetched_used;
  j["precision"] = precision();
  j["mithril_issued"] = mithril_issued;
  j["mithril_inserted"] = mithril_inserted;
  j["mithril_used"] = mithril_used;
  j["baseline_issued"] = baseline_issued;
  j["baseline_inserted"] = baseline_inserted;
  j["baseline_used"] = baseline_used;
  j["evictions"] = evictions;
  j["second_chance_reinsertions"] = second_chance_reinsertions;
  j["mining_runs"] = mining_runs;
  j["metadata_bytes"] = metadata_bytes;
  j["metadata_charge_blocks"] = metadata_charge_blocks;
  j["config"] = config;
  return j.dump();
}

}  // namespace cachesim
