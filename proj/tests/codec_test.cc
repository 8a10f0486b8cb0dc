// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/codec.h"

#include <gtest/gtest.h>

#include <random>

namespace zonestore {
namespace {

std::vector<std::span<const uint8_t>> Views(
    const std::vector<std::vector<uint8_t>>& shards) {
  std::vector<std::span<const uint8_t>> v;
  for (const auto& s : shards) v.emplace_back(s.data(), s.size());
  return v;
}

TEST(Raid4, XorOracleSingleByte) {
  auto codec = MakeRaid4Codec(5);
  std::vector<std::vector<uint8_t>> data = {
      {0x01}, {0x02}, {0x04}, {0x08}, {0x10}};
  std::vector<std::vector<uint8_t>> parity;
  ASSERT_TRUE(codec->Encode(Views(data), &parity).ok());
  ASSERT_EQ(parity.size(), 1u);
  EXPECT_EQ(parity[0], std::vector<uint8_t>{0x1F});
}

TEST(Raid4, ZeroDataZeroParity) {
  auto codec = MakeRaid4Codec(5);
  std::vector<std::vector<uint8_t>> data(5, std::vector<uint8_t>(64, 0));
  std::vector<std::vector<uint8_t>> parity;
  ASSERT_TRUE(codec->Encode(Views(data), &parity).ok());
  EXPECT_EQ(parity[0], std::vector<uint8_t>(64, 0));
}

TEST(Raid4, SelfInversePair) {
  auto codec = MakeRaid4Codec(2);
  std::vector<std::vector<uint8_t>> data = {{0xFF}, {0xFF}};
  std::vector<std::vector<uint8_t>> parity;
  ASSERT_TRUE(codec->Encode(Views(data), &parity).ok());
  EXPECT_EQ(parity[0], std::vector<uint8_t>{0x00});
}

TEST(Raid4, UnequalLengthsRejected) {
  auto codec = MakeRaid4Codec(2);
  std::vector<std::vector<uint8_t>> data = {{1, 2}, {3}};
  std::vector<std::vector<uint8_t>> parity;
  EXPECT_TRUE(codec->Encode(Views(data), &parity).IsUnequalShardLengths());
}

TEST(Raid4, ReconstructEachShardRoundTrip) {
  std::mt19937_64 rng(11);
  auto codec = MakeRaid4Codec(5);
  for (size_t len : {1ul, 7ul, 4096ul, 10000ul}) {
    std::vector<std::vector<uint8_t>> data(5, std::vector<uint8_t>(len));
    for (auto& shard : data)
      for (auto& b : shard) b = static_cast<uint8_t>(rng());
    std::vector<std::vector<uint8_t>> parity;
    ASSERT_TRUE(codec->Encode(Views(data), &parity).ok());
    for (size_t erase = 0; erase < 6; erase++) {
      ShardSet shards(6);
      for (size_t i = 0; i < 5; i++) shards[i] = data[i];
      shards[5] = parity[0];
      const std::vector<uint8_t> original = *shards[erase];
      shards[erase].reset();
      ASSERT_TRUE(codec->Reconstruct(&shards).ok());
      EXPECT_EQ(*shards[erase], original) << "erased " << erase;
    }
  }
}

TEST(Raid4, ParityShardIsFunctionOfData) {
  auto codec = MakeRaid4Codec(3);
  std::vector<std::vector<uint8_t>> data = {{1, 2}, {3, 4}, {5, 6}};
  std::vector<std::vector<uint8_t>> parity;
  ASSERT_TRUE(codec->Encode(Views(data), &parity).ok());
  ShardSet shards(4);
  for (size_t i = 0; i < 3; i++) shards[i] = data[i];
  shards[3].reset();
  ASSERT_TRUE(codec->Reconstruct(&shards).ok());
  EXPECT_EQ(*shards[3], parity[0]);
}

TEST(Raid4, TooManyMissing) {
  auto codec = MakeRaid4Codec(5);
  ShardSet shards(6);
  for (size_t i = 0; i < 6; i++) shards[i] = std::vector<uint8_t>{1};
  shards[1].reset();
  shards[4].reset();
  EXPECT_TRUE(codec->Reconstruct(&shards).IsTooManyMissing());
}

TEST(Raid4, VerifyDetectsSingleFlip) {
  auto codec = MakeRaid4Codec(5);
  std::mt19937_64 rng(3);
  std::vector<std::vector<uint8_t>> shards(5, std::vector<uint8_t>(256));
  for (auto& shard : shards)
    for (auto& b : shard) b = static_cast<uint8_t>(rng());
  std::vector<std::vector<uint8_t>> parity;
  ASSERT_TRUE(codec->Encode(Views(shards), &parity).ok());
  shards.push_back(parity[0]);

  bool consistent = false;
  ASSERT_TRUE(codec->Verify(Views(shards), &consistent).ok());
  EXPECT_TRUE(consistent);

  shards[2][100] ^= 0x40;
  ASSERT_TRUE(codec->Verify(Views(shards), &consistent).ok());
  EXPECT_FALSE(consistent);

  // Flipping the same bit in the parity shard masks the corruption: this is
  // the documented limit of single-parity protection.
  shards[5][100] ^= 0x40;
  ASSERT_TRUE(codec->Verify(Views(shards), &consistent).ok());
  EXPECT_TRUE(consistent);
}

TEST(Raid4, EncodeDeterministicAndLengthPreserving) {
  auto codec = MakeRaid4Codec(4);
  std::mt19937_64 rng(9);
  std::vector<std::vector<uint8_t>> data(4, std::vector<uint8_t>(1000));
  for (auto& shard : data)
    for (auto& b : shard) b = static_cast<uint8_t>(rng());
  std::vector<std::vector<uint8_t>> p1, p2;
  ASSERT_TRUE(codec->Encode(Views(data), &p1).ok());
  ASSERT_TRUE(codec->Encode(Views(data), &p2).ok());
  EXPECT_EQ(p1, p2);
  EXPECT_EQ(p1[0].size(), 1000u);
}

}  // namespace
}  // namespace zonestore
