// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

namespace zonestore {

// Little-endian fixed-width field encoding, shared by all on-disk records.

inline void PutU16(std::vector<uint8_t>* buf, uint16_t v) {
  buf->push_back(static_cast<uint8_t>(v));
  buf->push_back(static_cast<uint8_t>(v >> 8));
}

inline void PutU32(std::vector<uint8_t>* buf, uint32_t v) {
  for (int i = 0; i < 4; i++) buf->push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline void PutU64(std::vector<uint8_t>* buf, uint64_t v) {
  for (int i = 0; i < 8; i++) buf->push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline void PutBytes(std::vector<uint8_t>* buf, const void* p, size_t n) {
  const uint8_t* b = static_cast<const uint8_t*>(p);
  buf->insert(buf->end(), b, b + n);
}

inline void PatchU32(std::vector<uint8_t>* buf, size_t at, uint32_t v) {
  for (int i = 0; i < 4; i++) (*buf)[at + i] = static_cast<uint8_t>(v >> (8 * i));
}

// Bounds-checked sequential reader over an encoded record.
class Reader {
 public:
  explicit Reader(std::span<const uint8_t> data) : data_(data) {}

  size_t pos() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }
  bool ok() const { return ok_; }

  uint16_t U16() { return static_cast<uint16_t>(Fixed(2)); }
  uint32_t U32() { return static_cast<uint32_t>(Fixed(4)); }
  uint64_t U64() { return Fixed(8); }

  bool Bytes(void* out, size_t n) {
    if (!Check(n)) return false;
    memcpy(out, data_.data() + pos_, n);
    pos_ += n;
    return true;
  }

  bool Skip(size_t n) {
    if (!Check(n)) return false;
    pos_ += n;
    return true;
  }

 private:
  bool Check(size_t n) {
    if (!ok_ || data_.size() - pos_ < n) {
      ok_ = false;
      return false;
    }
    return true;
  }

  uint64_t Fixed(size_t n) {
    if (!Check(n)) return 0;
    uint64_t v = 0;
    for (size_t i = 0; i < n; i++)
      v |= static_cast<uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
  bool ok_ = true;
};

}  // namespace zonestore
