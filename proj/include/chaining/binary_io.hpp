#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chaining {

/// Malformed or mismatched file contents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void tag(std::string_view magic);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::istream& in) : in_(in) {}
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  void expect_tag(std::string_view magic);
  /// Throws unless the stream is exhausted.
  void expect_end();

 private:
  void read(void* dst, std::size_t n);
  std::istream& in_;
};

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

void write_bytes(std::ostream& out, std::span<const std::uint8_t> bytes);

}  // namespace chaining
