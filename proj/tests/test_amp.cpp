#include "cachesim/amp.hpp"

#include <map>
#include <random>

#include "doctest.h"

using namespace cachesim;

TEST_CASE("stream forms at the threshold; next extension prefetches ahead") {
  AmpPrefetcher amp;  // seq_threshold=2, p0=4
  CHECK(amp.on_request(1, false).empty());
  CHECK(amp.on_request(2, false).empty());  // stream detected, no emission yet
  auto d = amp.on_request(3, false);
  CHECK(d == std::vector<uint64_t>{4, 5, 6, 7});
  CHECK(amp.on_request(4, true).empty());  // inside gap, no trigger
  auto d2 = amp.on_request(5, true);
  CHECK(d2 == std::vector<uint64_t>{8, 9, 10, 11});
}

TEST_CASE("random non-sequential addresses never trigger prefetch") {
  AmpPrefetcher amp;
  std::mt19937_64 rng(5);
  bool any = false;
  for (int i = 0; i < 20000; ++i) {
    // spread addresses so consecutive values are vanishingly unlikely
    const uint64_t addr = (rng() % 1000000) * 3 + 1;
    any |= !amp.on_request(addr, false).empty();
  }
  CHECK(!any);
}

TEST_CASE("repeated addresses do not extend a stream") {
  AmpPrefetcher amp;
  amp.on_request(10, false);
  amp.on_request(10, false);
  amp.on_request(10, false);
  auto d = amp.on_request(11, false);  // run of length 2 now
  CHECK(d.empty());
  CHECK(!amp.on_request(12, false).empty());
}

TEST_CASE("a covered demand miss grows the degree") {
  AmpConfig cfg;
  cfg.initial_degree = 4;
  AmpPrefetcher amp(cfg);
  amp.on_request(1, false);
  amp.on_request(2, false);
  amp.on_request(3, false);  // prefetches 4..7, frontier 7
  amp.on_request(4, false);  // miss inside covered range -> degree 5
  auto d = amp.on_request(5, false);  // trigger: base 7, degree now 6
  CHECK(d.size() == 6);
  CHECK(d.front() == 8);
}

TEST_CASE("evicting an unused prefetched stream block shrinks the degree") {
  AmpPrefetcher amp;
  amp.on_request(1, false);
  amp.on_request(2, false);
  amp.on_request(3, false);  // frontier 7, degree 4
  amp.on_eviction({6, Origin::prefetch, false, false});
  amp.on_eviction({7, Origin::prefetch, true, false});    // touched: ignored
  amp.on_eviction({100, Origin::prefetch, false, false}); // outside: ignored
  uint32_t degree = 0;
  for (const auto& s : amp.streams())
    if (s.valid && s.active) degree = s.degree;
  CHECK(degree == 3);
}

TEST_CASE("stream table replaces the stalest slot under pressure") {
  AmpConfig cfg;
  cfg.stream_table_size = 2;
  AmpPrefetcher amp(cfg);
  amp.on_request(100, false);
  amp.on_request(200, false);
  amp.on_request(300, false);  // evicts the run at 100
  CHECK(amp.on_request(101, false).empty());   // 100 forgotten, new candidate
  CHECK(amp.on_request(301, false).empty());   // 300 still tracked: run of 2
  CHECK(!amp.on_request(302, false).empty());
}

TEST_CASE("an undisturbed stream emits strictly increasing addresses") {
  AmpPrefetcher amp;
  uint64_t last_emitted = 0;
  bool forward_ok = true;
  for (uint64_t addr = 1; addr <= 100000; ++addr) {
    auto decision = amp.on_request(addr, addr > 3);
    if (decision.empty()) continue;
    forward_ok &= decision.front() > last_emitted;
    for (size_t k = 1; k < decision.size(); ++k)
      forward_ok &= decision[k] == decision[k - 1] + 1;
    last_emitted = decision.back();
  }
  CHECK(forward_ok);
  CHECK(last_emitted > 100000);
}

TEST_CASE("fuzz: degree and gap stay in bounds, decisions stay ahead") {
  AmpConfig cfg;
  cfg.stream_table_size = 8;
  AmpPrefetcher amp(cfg);
  std::mt19937_64 rng(17);
  std::vector<uint64_t> streams(16);
  for (size_t i = 0; i < streams.size(); ++i)
    streams[i] = (i + 1) * 10'000'000ull;  // distinct, widely separated

  bool bounds_ok = true;
  bool ahead_ok = true;
  for (int i = 0; i < 1000000; ++i) {
    uint64_t addr;
    if (rng() % 4 == 0) {
      addr = (1ull << 40) + rng() % (1ull << 30);  // noise, away from streams
    } else {
      addr = streams[rng() % streams.size()]++;
    }
    const bool hit = rng() % 2;
    auto decision = amp.on_request(addr, hit);
    if (rng() % 16 == 0)
      amp.on_eviction({addr + rng() % 64,
                       rng() % 2 ? Origin::prefetch : Origin::demand,
                       static_cast<bool>(rng() % 2), false});
    for (size_t k = 0; k < decision.size(); ++k) {
      ahead_ok &= decision[k] > addr;  // never the trigger, never behind it
      if (k > 0) ahead_ok &= decision[k] == decision[k - 1] + 1;
    }
    for (const auto& s : amp.streams()) {
      if (!s.valid) continue;
      bounds_ok &= s.degree >= 1 && s.degree <= cfg.max_degree;
      const uint32_t g = (s.degree + 1) / 2;
      bounds_ok &= g >= 1 && g <= s.degree;
    }
  }
  CHECK(bounds_ok);
  CHECK(ahead_ok);
}
