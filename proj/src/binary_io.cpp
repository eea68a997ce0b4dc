#include "chaining/binary_io.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

namespace chaining {

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::tag(std::string_view magic) { bytes_.insert(bytes_.end(), magic.begin(), magic.end()); }

void ByteReader::read(void* dst, std::size_t n) {
  in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("unexpected end of file");
}

std::uint8_t ByteReader::u8() {
  std::uint8_t v;
  read(&v, 1);
  return v;
}

std::uint32_t ByteReader::u32() {
  std::uint8_t raw[4];
  read(raw, 4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | raw[i];
  return v;
}

std::uint64_t ByteReader::u64() {
  std::uint8_t raw[8];
  read(raw, 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | raw[i];
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

void ByteReader::expect_tag(std::string_view magic) {
  std::string found(magic.size(), '\0');
  read(found.data(), found.size());
  if (found != magic) throw FormatError("bad magic: expected " + std::string(magic));
}

void ByteReader::expect_end() {
  if (in_.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after payload");
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

void write_bytes(std::ostream& out, std::span<const std::uint8_t> bytes) {
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed");
}

}  // namespace chaining
