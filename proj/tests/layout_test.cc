// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/layout.h"

#include <gtest/gtest.h>

#include <random>

#include "test_util.h"

namespace zonestore {
namespace {

constexpr uint32_t kBlock = 4096;

LayoutMarkerBlock RandomLmb(std::mt19937_64& rng, bool tombstone = false) {
  LayoutMarkerBlock lmb;
  lmb.record_type = tombstone ? RecordType::kTombstone : RecordType::kSegment;
  lmb.object_id = test::RandomId(rng);
  lmb.version = rng();
  lmb.entry_timestamp = rng();
  if (!tombstone) {
    lmb.segment_id = static_cast<uint32_t>(rng());
    lmb.complete = rng() % 2 == 0;
    lmb.segment_length = rng() % (100ull << 20);
    lmb.fragment_length = AlignUp(lmb.segment_length / 5 + 1, kBlock);
    lmb.payload_checksum = static_cast<uint32_t>(rng());
  }
  return lmb;
}

DigestEntry RandomEntry(std::mt19937_64& rng) {
  DigestEntry e;
  e.record_type = rng() % 4 == 0 ? RecordType::kTombstone : RecordType::kSegment;
  e.complete = rng() % 2 == 0;
  e.object_id = test::RandomId(rng);
  e.version = rng();
  e.segment_id = static_cast<uint32_t>(rng());
  if (e.record_type == RecordType::kSegment) {
    e.segment_length = rng() % (64ull << 20);
    e.fragment_length = AlignUp(e.segment_length / 5 + 1, kBlock);
  }
  e.entry_timestamp = rng();
  e.offset = AlignDown(rng() % (256ull << 20), kBlock);
  return e;
}

TEST(Lmb, RoundTripRandomFields) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; i++) {
    const LayoutMarkerBlock lmb = RandomLmb(rng, i % 5 == 0);
    std::vector<uint8_t> block;
    ASSERT_OK(EncodeLmb(lmb, kBlock, &block));
    EXPECT_EQ(block.size(), kBlock);
    LayoutMarkerBlock back;
    ASSERT_OK(DecodeLmb(block, &back));
    EXPECT_EQ(back, lmb);
  }
}

TEST(Lmb, AllZeroBlockIsBadMagic) {
  std::vector<uint8_t> zeros(kBlock, 0);
  LayoutMarkerBlock lmb;
  EXPECT_TRUE(DecodeLmb(zeros, &lmb).IsBadMagic());
}

TEST(Lmb, SingleByteCorruptionDetected) {
  std::mt19937_64 rng(6);
  const LayoutMarkerBlock lmb = RandomLmb(rng);
  std::vector<uint8_t> block;
  ASSERT_OK(EncodeLmb(lmb, kBlock, &block));
  // Every byte of the covered header must be protected.
  for (size_t pos = 0; pos < 88; pos++) {
    std::vector<uint8_t> mutated = block;
    mutated[pos] ^= 0x01;
    LayoutMarkerBlock out;
    EXPECT_FALSE(DecodeLmb(mutated, &out).ok()) << "byte " << pos;
  }
}

TEST(Lmb, TombstoneLengthsMustBeZero) {
  LayoutMarkerBlock lmb;
  lmb.record_type = RecordType::kTombstone;
  lmb.segment_length = 1;
  std::vector<uint8_t> block;
  EXPECT_TRUE(EncodeLmb(lmb, kBlock, &block).IsInvalidArgument());
}

TEST(Digest, RoundTripEmpty) {
  ZoneSetDigest digest;
  std::vector<uint8_t> buf;
  ASSERT_OK(EncodeDigest(digest, kBlock, &buf));
  EXPECT_EQ(buf.size(), kBlock);
  ZoneSetDigest back;
  ASSERT_OK(DecodeDigest(buf, &back));
  EXPECT_EQ(back.entries.size(), 0u);
}

TEST(Digest, RoundTripManyEntriesMultiBlock) {
  std::mt19937_64 rng(7);
  ZoneSetDigest digest;
  for (int i = 0; i < 300; i++) digest.entries.push_back(RandomEntry(rng));
  std::vector<uint8_t> buf;
  ASSERT_OK(EncodeDigest(digest, kBlock, &buf));
  EXPECT_EQ(buf.size() % kBlock, 0u);
  EXPECT_GT(buf.size(), size_t{kBlock});
  ZoneSetDigest back;
  ASSERT_OK(DecodeDigest(buf, &back));
  EXPECT_EQ(back, digest);

  // Tail trailer locates the digest from its final block.
  uint32_t blocks = 0;
  ASSERT_OK(DigestBlocksFromTailBlock(
      std::span<const uint8_t>(buf.data() + buf.size() - kBlock, kBlock),
      &blocks));
  EXPECT_EQ(blocks, buf.size() / kBlock);
  EXPECT_EQ(blocks, DigestBlocks(digest.entries.size(), kBlock));
}

TEST(Digest, CorruptionDetected) {
  std::mt19937_64 rng(8);
  ZoneSetDigest digest;
  for (int i = 0; i < 10; i++) digest.entries.push_back(RandomEntry(rng));
  std::vector<uint8_t> buf;
  ASSERT_OK(EncodeDigest(digest, kBlock, &buf));
  for (int trial = 0; trial < 50; trial++) {
    std::vector<uint8_t> mutated = buf;
    // Corrupt within the covered region (header + entries + checksum).
    const size_t covered = 12 + 80 * digest.entries.size() + 4;
    mutated[rng() % covered] ^= static_cast<uint8_t>(1 + rng() % 255);
    ZoneSetDigest out;
    EXPECT_FALSE(DecodeDigest(mutated, &out).ok());
  }
}

TEST(Digest, TruncatedRejected) {
  ZoneSetDigest digest;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 80; i++) digest.entries.push_back(RandomEntry(rng));
  std::vector<uint8_t> buf;
  ASSERT_OK(EncodeDigest(digest, kBlock, &buf));
  ZoneSetDigest out;
  EXPECT_TRUE(DecodeDigest(std::span<const uint8_t>(buf.data(), kBlock), &out)
                  .IsTruncatedRecord());
}

Superblock SampleSuperblock(std::mt19937_64& rng, size_t sets) {
  Superblock sb;
  sb.sequence = rng();
  sb.written_at = rng();
  sb.clean_shutdown = rng() % 2 == 0;
  sb.logical_clock = rng();
  sb.block_size = kBlock;
  sb.zone_capacity = 8ull << 20;
  sb.zone_count = 64;
  sb.width = 6;
  sb.superblock_zones_per_drive = 2;
  for (uint32_t d = 0; d < 6; d++) {
    DriveDescriptor desc;
    desc.drive_id = d;
    desc.zone_count = 64;
    desc.status = d == 5 ? 1u : 0u;
    for (auto& b : desc.uuid) b = static_cast<uint8_t>(rng());
    sb.drives.push_back(desc);
  }
  for (uint32_t i = 0; i < sets; i++) {
    ZoneSetRow row;
    row.zoneset_id = i;
    row.state = static_cast<ZoneSetState>(rng() % 6);
    row.dead_bytes = rng() % (48ull << 20);
    for (uint32_t d = 0; d < 6; d++)
      row.members.push_back(ZoneMember{d, i + 2});
    sb.zone_sets.push_back(std::move(row));
  }
  SnapshotManifest m;
  m.snapshot_id = rng();
  m.created_at = rng();
  m.complete = true;
  m.total_length = rng() % (1ull << 20);
  m.content_checksum = static_cast<uint32_t>(rng());
  m.index_set_ids = {3, 9};
  m.extents.push_back(SnapshotExtent{3, 0, 123456});
  m.extents.push_back(SnapshotExtent{9, 4096, 7});
  sb.manifests.push_back(m);
  SnapshotManifest wip = m;
  wip.snapshot_id++;
  wip.complete = false;
  sb.manifests.push_back(wip);
  return sb;
}

TEST(Superblock, RoundTrip384Sets) {
  std::mt19937_64 rng(10);
  const Superblock sb = SampleSuperblock(rng, 384);
  std::vector<uint8_t> buf;
  ASSERT_OK(EncodeSuperblock(sb, kBlock, &buf));
  EXPECT_EQ(buf.size() % kBlock, 0u);
  Superblock back;
  ASSERT_OK(DecodeSuperblock(buf, &back));
  EXPECT_EQ(back, sb);

  uint32_t blocks = 0;
  ASSERT_OK(SuperblockBlocksFromHeader(
      std::span<const uint8_t>(buf.data(), kBlock), &blocks));
  EXPECT_EQ(blocks, buf.size() / kBlock);
}

TEST(Superblock, HighestSequenceWins) {
  std::mt19937_64 rng(11);
  Superblock a = SampleSuperblock(rng, 4);
  Superblock b = a;
  a.sequence = 3;
  b.sequence = 7;
  // The caller keeps the superblock with the larger sequence.
  EXPECT_GT(b.sequence, a.sequence);
}

TEST(Superblock, CorruptionDetected) {
  std::mt19937_64 rng(12);
  const Superblock sb = SampleSuperblock(rng, 32);
  std::vector<uint8_t> buf;
  ASSERT_OK(EncodeSuperblock(sb, kBlock, &buf));
  Superblock out;
  for (int trial = 0; trial < 40; trial++) {
    std::vector<uint8_t> mutated = buf;
    mutated[16 + rng() % 64] ^= 0xFF;
    EXPECT_FALSE(DecodeSuperblock(mutated, &out).ok());
  }
  EXPECT_TRUE(
      DecodeSuperblock(std::span<const uint8_t>(buf.data(), 64), &out)
          .IsTruncatedRecord());
}

TEST(Layout, EncodersEmitBlockMultiples) {
  std::mt19937_64 rng(13);
  for (uint32_t bs : {512u, 4096u, 32768u}) {
    std::vector<uint8_t> buf;
    ASSERT_OK(EncodeLmb(RandomLmb(rng), bs, &buf));
    EXPECT_EQ(buf.size(), bs);
    ZoneSetDigest digest;
    for (int i = 0; i < 40; i++) digest.entries.push_back(RandomEntry(rng));
    ASSERT_OK(EncodeDigest(digest, bs, &buf));
    EXPECT_EQ(buf.size() % bs, 0u);
    ASSERT_OK(EncodeSuperblock(SampleSuperblock(rng, 62), bs, &buf));
    EXPECT_EQ(buf.size() % bs, 0u);
  }
}

}  // namespace
}  // namespace zonestore
