#include "cachesim/trace.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>

#include "cachesim/errors.hpp"

namespace cachesim {

TraceFormat TraceFormat::msr_extent(uint64_t block_size) {
  TraceFormat f;
  f.kind = TraceKind::extent_csv;
  f.col_op = 3;
  f.col_address = 4;
  f.col_length = 5;
  f.block_size = block_size;
  return f;
}

void TraceFormat::validate() const {
  if (address_radix != 10 && address_radix != 16)
    throw ConfigError("trace format: address radix must be 10 or 16");
  if (kind == TraceKind::extent_csv) {
    if (block_size == 0)
      throw ConfigError("trace format: extent-csv requires block_size > 0");
    if (col_length == kNoColumn)
      throw ConfigError("trace format: extent-csv requires a length column");
  }
}

std::vector<uint64_t> expand_extent(uint64_t offset_bytes,
                                    uint64_t length_bytes,
                                    uint64_t block_size) {
  if (block_size == 0)
    throw ConfigError("expand_extent: block_size must be > 0");
  const uint64_t first = offset_bytes / block_size;
  const uint64_t span = length_bytes ? length_bytes : 1;
  const uint64_t last = (offset_bytes + span - 1) / block_size;
  std::vector<uint64_t> blocks;
  blocks.reserve(static_cast<size_t>(last - first + 1));
  for (uint64_t b = first; b <= last; ++b) blocks.push_back(b);
  return blocks;
}

std::vector<BlockRequest> read_all(TraceReader& reader) {
  std::vector<BlockRequest> out;
  while (auto r = reader.next()) out.push_back(*r);
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

uint64_t parse_u64(std::string_view field, int radix, size_t line_no) {
  field = trim(field);
  if (radix == 16 && field.size() > 2 &&
      (field.substr(0, 2) == "0x" || field.substr(0, 2) == "0X"))
    field.remove_prefix(2);
  if (field.empty())
    throw TraceError("empty numeric field at line " + std::to_string(line_no));
  uint64_t value = 0;
  for (char c : field) {
    int digit;
    if (c >= '0' && c <= '9')
      digit = c - '0';
    else if (radix == 16 && c >= 'a' && c <= 'f')
      digit = c - 'a' + 10;
    else if (radix == 16 && c >= 'A' && c <= 'F')
      digit = c - 'A' + 10;
    else
      throw TraceError("malformed number '" + std::string(field) +
                       "' at line " + std::to_string(line_no));
    value = value * static_cast<uint64_t>(radix) + static_cast<uint64_t>(digit);
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string_view field_at(const std::vector<std::string_view>& fields,
                          size_t col, size_t line_no) {
  if (col >= fields.size())
    throw TraceError("missing column " + std::to_string(col) + " at line " +
                     std::to_string(line_no));
  return fields[col];
}

bool is_read_op(std::string_view op) {
  op = trim(op);
  return !op.empty() && (op.front() == 'R' || op.front() == 'r');
}

// Shared line-oriented reader: subclasses turn one line into zero or more
// block addresses.
class LineTraceReader : public TraceReader {
 public:
  LineTraceReader(const std::string& path, TraceFormat fmt)
      : fmt_(fmt), in_(path) {
    if (!in_) throw TraceError("cannot open trace file: " + path);
  }

  std::optional<BlockRequest> next() override {
    while (pending_.empty()) {
      std::string line;
      if (!std::getline(in_, line)) return std::nullopt;
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (trim(line).empty()) continue;
      try {
        for (uint64_t a : parse_line(line, line_no_)) pending_.push_back(a);
      } catch (const TraceError&) {
        if (fmt_.on_parse_error == ParseErrorPolicy::fail) throw;
      }
    }
    BlockRequest r{next_seq_++, pending_.front()};
    pending_.pop_front();
    return r;
  }

 protected:
  virtual std::vector<uint64_t> parse_line(std::string_view line,
                                           size_t line_no) = 0;
  TraceFormat fmt_;

 private:
  std::ifstream in_;
  std::deque<uint64_t> pending_;
  uint64_t next_seq_ = 0;
  size_t line_no_ = 0;
};

class PlaintextReader final : public LineTraceReader {
 public:
  using LineTraceReader::LineTraceReader;

 protected:
  std::vector<uint64_t> parse_line(std::string_view line,
                                   size_t line_no) override {
    return {parse_u64(line, fmt_.address_radix, line_no)};
  }
};

class CsvReader final : public LineTraceReader {
 public:
  using LineTraceReader::LineTraceReader;

 protected:
  std::vector<uint64_t> parse_line(std::string_view line,
                                   size_t line_no) override {
    auto fields = split_fields(line);
    if (fmt_.reads_only && fmt_.col_op != TraceFormat::kNoColumn &&
        !is_read_op(field_at(fields, fmt_.col_op, line_no)))
      return {};
    return {parse_u64(field_at(fields, fmt_.col_address, line_no),
                      fmt_.address_radix, line_no)};
  }
};

class ExtentCsvReader final : public LineTraceReader {
 public:
  using LineTraceReader::LineTraceReader;

 protected:
  std::vector<uint64_t> parse_line(std::string_view line,
                                   size_t line_no) override {
    auto fields = split_fields(line);
    if (fmt_.reads_only && fmt_.col_op != TraceFormat::kNoColumn &&
        !is_read_op(field_at(fields, fmt_.col_op, line_no)))
      return {};
    const uint64_t offset = parse_u64(
        field_at(fields, fmt_.col_address, line_no), fmt_.address_radix,
        line_no);
    const uint64_t length = parse_u64(
        field_at(fields, fmt_.col_length, line_no), fmt_.address_radix,
        line_no);
    return expand_extent(offset, length, fmt_.block_size);
  }
};

class Binary64Reader final : public TraceReader {
 public:
  Binary64Reader(const std::string& path, TraceFormat fmt)
      : in_(path, std::ios::binary), fmt_(fmt) {
    if (!in_) throw TraceError("cannot open trace file: " + path);
  }

  std::optional<BlockRequest> next() override {
    unsigned char buf[8];
    in_.read(reinterpret_cast<char*>(buf), sizeof(buf));
    const auto got = in_.gcount();
    if (got == 0) return std::nullopt;
    if (got != sizeof(buf)) {
      if (fmt_.on_parse_error == ParseErrorPolicy::skip) return std::nullopt;
      throw TraceError("truncated 8-byte record " +
                       std::to_string(next_seq_) + " (got " +
                       std::to_string(got) + " bytes)");
    }
    uint64_t addr = 0;
    for (size_t i = 0; i < sizeof(buf); ++i)
      addr |= static_cast<uint64_t>(buf[i]) << (8 * i);
    ++record_no_;
    return BlockRequest{next_seq_++, addr};
  }

 private:
  std::ifstream in_;
  TraceFormat fmt_;
  uint64_t next_seq_ = 0;
  uint64_t record_no_ = 0;
};

}  // namespace

std::unique_ptr<TraceReader> open_trace(const std::string& path,
                                        const TraceFormat& fmt) {
  fmt.validate();
  switch (fmt.kind) {
    case TraceKind::plaintext:
      return std::make_unique<PlaintextReader>(path, fmt);
    case TraceKind::csv:
      return std::make_unique<CsvReader>(path, fmt);
    case TraceKind::extent_csv:
      return std::make_unique<ExtentCsvReader>(path, fmt);
    case TraceKind::binary64:
      return std::make_unique<Binary64Reader>(path, fmt);
  }
  throw ConfigError("unknown trace format kind");
}

}  // namespace cachesim
