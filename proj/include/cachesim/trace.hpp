#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cachesim {

// One trace event. `seq` is the 0-based logical reference number assigned at
// emission; `addr` is the block index after extent expansion.
struct BlockRequest {
  uint64_t seq = 0;
  uint64_t addr = 0;
  friend bool operator==(const BlockRequest&, const BlockRequest&) = default;
};

enum class TraceKind { plaintext, csv, binary64, extent_csv };

enum class ParseErrorPolicy { fail, skip };

// On-disk layout description. Column indices apply to csv and extent_csv;
// extent_csv defaults follow the MSR-Cambridge column order
// (timestamp, host, disk, op, offset, length, latency).
struct TraceFormat {
  static constexpr size_t kNoColumn = std::numeric_limits<size_t>::max();

  TraceKind kind = TraceKind::plaintext;
  int address_radix = 10;         // 10 or 16
  size_t col_address = 0;         // csv: block index; extent_csv: byte offset
  size_t col_length = kNoColumn;  // extent_csv: byte length
  size_t col_op = kNoColumn;      // optional read/write column
  uint64_t block_size = 4096;     // extent expansion unit
  bool reads_only = false;        // drop rows whose op is not a read
  ParseErrorPolicy on_parse_error = ParseErrorPolicy::fail;

  static TraceFormat msr_extent(uint64_t block_size = 4096);
  void validate() const;
};

class TraceReader {
 public:
  virtual ~TraceReader() = default;
  // Next request, or nullopt at end of stream (a normal terminal value).
  // Throws TraceError for a malformed record under ParseErrorPolicy::fail;
  // under skip, the bad record is dropped and reading continues.
  virtual std::optional<BlockRequest> next() = 0;
};

// Opens `path` with the given format. Throws TraceError if the file cannot
// be read, ConfigError for an invalid format.
std::unique_ptr<TraceReader> open_trace(const std::string& path,
                                        const TraceFormat& fmt);

// Reader over an in-memory address sequence (synthetic workloads, tests).
class MemoryTraceReader final : public TraceReader {
 public:
  explicit MemoryTraceReader(std::vector<uint64_t> addrs)
      : addrs_(std::move(addrs)) {}
  std::optional<BlockRequest> next() override {
    if (pos_ == addrs_.size()) return std::nullopt;
    BlockRequest r{pos_, addrs_[pos_]};
    ++pos_;
    return r;
  }

 private:
  std::vector<uint64_t> addrs_;
  uint64_t pos_ = 0;
};

// Block indices touched by a byte extent: floor(offset/bs) through
// floor((offset+max(length,1)-1)/bs). A zero-length extent still names a
// block, so it counts as touching one.
std::vector<uint64_t> expand_extent(uint64_t offset_bytes,
                                    uint64_t length_bytes,
                                    uint64_t block_size);

std::vector<BlockRequest> read_all(TraceReader& reader);

}  // namespace cachesim
