#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cachesim/amp.hpp"
#include "cachesim/cache.hpp"
#include "cachesim/mithril.hpp"
#include "cachesim/pg.hpp"
#include "cachesim/trace.hpp"

namespace cachesim {

// A composed simulation stack: the cache, at most one baseline prefetcher
// (AMP or PG), and optionally the Mithril layer on top. Mithril observes each
// demand request and its hit/miss outcome before any prefetch insertions for
// that request; prefetch insertions from every layer share the cache.
struct StackConfig {
  CacheConfig cache;
  uint64_t block_size = 4096;
  std::optional<AmpConfig> amp;
  std::optional<PgConfig> pg;
  std::optional<MithrilConfig> mithril;

  void validate() const;
};

struct SimulationReport {
  size_t capacity_blocks = 0;
  size_t effective_capacity_blocks = 0;
  size_t metadata_charge_blocks = 0;
  size_t metadata_bytes = 0;  // charged maximum across layers

  uint64_t requests = 0;
  uint64_t hits = 0;
  uint64_t misses = 0;
  uint64_t cold_misses = 0;  // miss on the first demand access of a block

  // issued counts decision entries; inserted counts insertions actually
  // performed (already-resident candidates are filtered out); used counts
  // inserted blocks that received a demand hit. precision() uses inserted.
  uint64_t prefetches_issued = 0;
  uint64_t prefetches_inserted = 0;
  uint64_t prefetched_used = 0;
  uint64_t mithril_issued = 0, mithril_inserted = 0, mithril_used = 0;
  uint64_t baseline_issued = 0, baseline_inserted = 0, baseline_used = 0;

  uint64_t evictions = 0;
  uint64_t second_chance_reinsertions = 0;
  uint64_t mining_runs = 0;

  // Every config knob, echoed for reproducibility.
  std::map<std::string, std::string> config;

  double hit_ratio() const {
    return requests ? static_cast<double>(hits) / static_cast<double>(requests)
                    : 0.0;
  }
  double precision() const {
    return prefetches_inserted ? static_cast<double>(prefetched_used) /
                                     static_cast<double>(prefetches_inserted)
                               : 0.0;
  }
  double max_obtainable_hit_ratio() const {
    return requests ? 1.0 - static_cast<double>(cold_misses) /
                                static_cast<double>(requests)
                    : 0.0;
  }

  static std::string csv_header();
  std::string csv_row() const;
  std::string to_json_line() const;
};

struct BlockStats {
  uint64_t addr = 0;
  uint64_t frequency = 0;  // demand requests in the trace
  uint64_t hit_count = 0;
};

struct RunOutputs {
  // Per-block (addr, frequency, hit_count) rows, sorted by frequency
  // descending then address. Sum of hit_count equals the report's hits.
  std::vector<BlockStats>* block_stats = nullptr;
  // Prefetching-table contents after the run (requires the Mithril layer).
  std::vector<Association>* associations = nullptr;
};

// Drives the trace through the stack. Metadata for the configured layers is
// charged up-front at its maximum: ceil(bytes / block_size) blocks are
// deducted from cache capacity (a ConfigError if nothing is left).
SimulationReport run(TraceReader& trace, const StackConfig& stack,
                     const RunOutputs& outputs = {});

using TraceFactory = std::function<std::unique_ptr<TraceReader>()>;

// One independent run per capacity, fresh state each, executed concurrently;
// reports come back in size order. Sizes must be nonempty and strictly
// increasing.
std::vector<SimulationReport> sweep(const TraceFactory& trace_factory,
                                    std::span<const size_t> sizes_blocks,
                                    const StackConfig& base);

std::vector<BlockStats> analyze_hit_frequency(TraceReader& trace,
                                              const StackConfig& stack);

}  // namespace cachesim
