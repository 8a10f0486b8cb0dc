// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/crc32c.h"

#include <gtest/gtest.h>

#include <random>
#include <vector>

namespace zonestore {
namespace {

TEST(Crc32c, KnownVectors) {
  // Standard CRC-32C check value.
  EXPECT_EQ(crc32c::Value("123456789", 9), 0xE3069283u);
  // 32 zero bytes, per the iSCSI test vectors.
  std::vector<uint8_t> zeros(32, 0);
  EXPECT_EQ(crc32c::Value(zeros.data(), zeros.size()), 0x8A9136AAu);
  std::vector<uint8_t> ones(32, 0xFF);
  EXPECT_EQ(crc32c::Value(ones.data(), ones.size()), 0x62A8AB43u);
}

TEST(Crc32c, EmptyIsZero) { EXPECT_EQ(crc32c::Value("", 0), 0u); }

TEST(Crc32c, IncrementalMatchesOneShot) {
  std::mt19937_64 rng(7);
  std::vector<uint8_t> data(100000);
  for (auto& b : data) b = static_cast<uint8_t>(rng());
  const uint32_t whole = crc32c::Value(data.data(), data.size());
  for (size_t split : {1ul, 13ul, 4096ul, 99999ul}) {
    uint32_t crc = crc32c::Extend(0, data.data(), split);
    crc = crc32c::Extend(crc, data.data() + split, data.size() - split);
    EXPECT_EQ(crc, whole) << "split at " << split;
  }
}

TEST(Crc32c, SingleByteChangesValue) {
  std::vector<uint8_t> data(4096, 0xA5);
  const uint32_t before = crc32c::Value(data.data(), data.size());
  data[1234] ^= 0x01;
  EXPECT_NE(crc32c::Value(data.data(), data.size()), before);
}

}  // namespace
}  // namespace zonestore
