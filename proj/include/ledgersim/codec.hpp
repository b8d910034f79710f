#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ledgersim/bytes.hpp"

namespace ledgersim {

// Canonical binary encoding used for hashing, signing and the block file
// format: fixed-width big-endian integers and length-prefixed byte fields,
// written in a fixed field order. All nodes must agree on these bytes.

class CodecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Writer {
 public:
  void u8(uint8_t v);
  void u16(uint16_t v);
  void u32(uint32_t v);
  void u64(uint64_t v);
  void i64(int64_t v);
  void boolean(bool v) { u8(v ? 1 : 0); }
  void raw(ByteSpan b);
  void blob(ByteSpan b);          // u32 length + raw
  void str(std::string_view s);   // u32 length + raw

  const Bytes& bytes() const { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(ByteSpan data) : data_(data) {}

  uint8_t u8();
  uint16_t u16();
  uint32_t u32();
  uint64_t u64();
  int64_t i64();
  bool boolean() { return u8() != 0; }
  Bytes raw(size_t n);
  Bytes blob();
  std::string str();

  bool done() const { return pos_ == data_.size(); }
  size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(size_t n) const;
  ByteSpan data_;
  size_t pos_ = 0;
};

}  // namespace ledgersim
