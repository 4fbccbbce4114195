#include "cachesim/trace.hpp"

#include <random>

#include "cachesim/errors.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cachesim;
using testutil::TempFile;

TEST_CASE("expand_extent basics") {
  CHECK(expand_extent(0, 4096, 4096) == std::vector<uint64_t>{0});
  CHECK(expand_extent(4095, 2, 4096) == std::vector<uint64_t>{0, 1});
  CHECK(expand_extent(8192, 0, 4096) == std::vector<uint64_t>{2});
  CHECK(expand_extent(8192, 8192, 4096) == std::vector<uint64_t>{2, 3});
  CHECK_THROWS_AS(expand_extent(0, 1, 0), ConfigError);
}

TEST_CASE("expand_extent output is contiguous and nonempty") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const uint64_t bs = 1 + rng() % 8192;
    const uint64_t offset = rng() % (1ull << 40);
    const uint64_t length = rng() % (1ull << 20);
    auto blocks = expand_extent(offset, length, bs);
    REQUIRE(!blocks.empty());
    for (size_t k = 1; k < blocks.size(); ++k)
      CHECK(blocks[k] == blocks[k - 1] + 1);
    CHECK(blocks.front() == offset / bs);
  }
}

TEST_CASE("plaintext: one address per non-empty line") {
  TempFile f("t.txt");
  f.write_text("7\n7\n9\n");
  auto reader = open_trace(f.str(), TraceFormat{});
  auto all = read_all(*reader);
  REQUIRE(all.size() == 3);
  CHECK(all[0] == BlockRequest{0, 7});
  CHECK(all[1] == BlockRequest{1, 7});
  CHECK(all[2] == BlockRequest{2, 9});
}

TEST_CASE("plaintext: blank lines skipped, hex radix") {
  TempFile f("t.txt");
  f.write_text("\n0x10\n\n  ff \n");
  TraceFormat fmt;
  fmt.address_radix = 16;
  auto all = read_all(*open_trace(f.str(), fmt));
  REQUIRE(all.size() == 2);
  CHECK(all[0].addr == 0x10);
  CHECK(all[1].addr == 0xff);
}

TEST_CASE("plaintext: empty file is end-of-stream immediately") {
  TempFile f("empty.txt");
  f.write_text("");
  auto reader = open_trace(f.str(), TraceFormat{});
  CHECK(!reader->next().has_value());
  CHECK(!reader->next().has_value());
}

TEST_CASE("plaintext: malformed line names the line number") {
  TempFile f("bad.txt");
  f.write_text("1\n2\nnope\n4\n");
  auto reader = open_trace(f.str(), TraceFormat{});
  reader->next();
  reader->next();
  try {
    reader->next();
    FAIL("expected TraceError");
  } catch (const TraceError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("plaintext: skip policy drops the bad record and renumbers") {
  TempFile f("bad.txt");
  f.write_text("1\nnope\n4\n");
  TraceFormat fmt;
  fmt.on_parse_error = ParseErrorPolicy::skip;
  auto all = read_all(*open_trace(f.str(), fmt));
  REQUIRE(all.size() == 2);
  CHECK(all[0] == BlockRequest{0, 1});
  CHECK(all[1] == BlockRequest{1, 4});
}

TEST_CASE("binary64: packed little-endian words") {
  TempFile f("t.bin");
  f.write_u64le({5, 0x1234567890abcdefull, 5});
  TraceFormat fmt;
  fmt.kind = TraceKind::binary64;
  auto all = read_all(*open_trace(f.str(), fmt));
  REQUIRE(all.size() == 3);
  CHECK(all[0].addr == 5);
  CHECK(all[1].addr == 0x1234567890abcdefull);
  CHECK(all[2].addr == 5);
}

TEST_CASE("binary64: truncated trailing record") {
  TempFile f("t.bin");
  {
    std::ofstream out(f.str(), std::ios::binary);
    const char bytes[11] = {1, 0, 0, 0, 0, 0, 0, 0, 9, 9, 9};
    out.write(bytes, sizeof(bytes));
  }
  TraceFormat fmt;
  fmt.kind = TraceKind::binary64;
  auto reader = open_trace(f.str(), fmt);
  CHECK(reader->next()->addr == 1);
  CHECK_THROWS_AS(reader->next(), TraceError);

  fmt.on_parse_error = ParseErrorPolicy::skip;
  auto all = read_all(*open_trace(f.str(), fmt));
  CHECK(all.size() == 1);
}

TEST_CASE("csv: column map selects the address") {
  TempFile f("t.csv");
  f.write_text("x,y,12\nx,y,13\n");
  TraceFormat fmt;
  fmt.kind = TraceKind::csv;
  fmt.col_address = 2;
  auto all = read_all(*open_trace(f.str(), fmt));
  REQUIRE(all.size() == 2);
  CHECK(all[0].addr == 12);
  CHECK(all[1].addr == 13);
}

TEST_CASE("extent-csv: MSR-style rows expand to block runs") {
  TempFile f("msr.csv");
  f.write_text(
      "128166372003061629,hm,0,Read,8192,8192,559\n"
      "128166372003061630,hm,0,Write,4095,2,100\n");
  auto fmt = TraceFormat::msr_extent(4096);
  auto all = read_all(*open_trace(f.str(), fmt));
  REQUIRE(all.size() == 4);
  CHECK(all[0] == BlockRequest{0, 2});
  CHECK(all[1] == BlockRequest{1, 3});
  CHECK(all[2] == BlockRequest{2, 0});
  CHECK(all[3] == BlockRequest{3, 1});
}

TEST_CASE("extent-csv: reads_only drops write rows and keeps seq dense") {
  TempFile f("msr.csv");
  f.write_text(
      "1,hm,0,Read,0,4096,1\n"
      "2,hm,0,Write,4096,4096,1\n"
      "3,hm,0,Read,8192,4096,1\n");
  auto fmt = TraceFormat::msr_extent(4096);
  fmt.reads_only = true;
  auto all = read_all(*open_trace(f.str(), fmt));
  REQUIRE(all.size() == 2);
  CHECK(all[0] == BlockRequest{0, 0});
  CHECK(all[1] == BlockRequest{1, 2});
}

TEST_CASE("extent-csv requires block_size > 0") {
  TraceFormat fmt = TraceFormat::msr_extent(0);
  CHECK_THROWS_AS(open_trace("whatever", fmt), ConfigError);
}

TEST_CASE("missing file is a TraceError naming the path") {
  try {
    open_trace("/nonexistent/trace.txt", TraceFormat{});
    FAIL("expected TraceError");
  } catch (const TraceError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/trace.txt") !=
          std::string::npos);
  }
}

TEST_CASE("seq numbering is 0..N-1 and re-reads are identical") {
  std::mt19937_64 rng(42);
  TempFile f("fuzz.txt");
  std::string text;
  const size_t n = 500;
  for (size_t i = 0; i < n; ++i)
    text += std::to_string(rng() % 1000) + "\n";
  f.write_text(text);

  auto first = read_all(*open_trace(f.str(), TraceFormat{}));
  auto second = read_all(*open_trace(f.str(), TraceFormat{}));
  REQUIRE(first.size() == n);
  for (size_t i = 0; i < n; ++i) CHECK(first[i].seq == i);
  CHECK(first == second);
}

TEST_CASE("memory reader mirrors file semantics") {
  MemoryTraceReader reader({4, 4, 2});
  auto all = read_all(reader);
  REQUIRE(all.size() == 3);
  CHECK(all[2] == BlockRequest{2, 2});
}
