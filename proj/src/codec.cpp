#include "ledgersim/codec.hpp"

namespace ledgersim {

void Writer::u8(uint8_t v) { out_.push_back(v); }

void Writer::u16(uint16_t v) {
  out_.push_back(static_cast<uint8_t>(v >> 8));
  out_.push_back(static_cast<uint8_t>(v));
}

void Writer::u32(uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out_.push_back(static_cast<uint8_t>(v >> shift));
  }
}

void Writer::u64(uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out_.push_back(static_cast<uint8_t>(v >> shift));
  }
}

void Writer::i64(int64_t v) { u64(static_cast<uint64_t>(v)); }

void Writer::raw(ByteSpan b) { out_.insert(out_.end(), b.begin(), b.end()); }

void Writer::blob(ByteSpan b) {
  if (b.size() > 0xffffffffull) throw CodecError("blob too large");
  u32(static_cast<uint32_t>(b.size()));
  raw(b);
}

void Writer::str(std::string_view s) {
  blob(ByteSpan(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
}

void Reader::need(size_t n) const {
  if (pos_ + n > data_.size()) throw CodecError("truncated input");
}

uint8_t Reader::u8() {
  need(1);
  return data_[pos_++];
}

uint16_t Reader::u16() {
  need(2);
  uint16_t v = static_cast<uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
  pos_ += 2;
  return v;
}

uint32_t Reader::u32() {
  need(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_ + i];
  pos_ += 4;
  return v;
}

uint64_t Reader::u64() {
  need(8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = v << 8 | data_[pos_ + i];
  pos_ += 8;
  return v;
}

int64_t Reader::i64() { return static_cast<int64_t>(u64()); }

Bytes Reader::raw(size_t n) {
  need(n);
  Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
  pos_ += n;
  return out;
}

Bytes Reader::blob() {
  uint32_t n = u32();
  return raw(n);
}

std::string Reader::str() {
  Bytes b = blob();
  return std::string(b.begin(), b.end());
}

}  // namespace ledgersim
