// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/index.h"

#include <gtest/gtest.h>

#include <map>
#include <random>

#include "test_util.h"
#include "zonestore/flash_index.h"

namespace zonestore {
namespace {

IndexKey Key(uint64_t obj, Timestamp version, uint32_t seg = 0,
             bool complete = true) {
  return IndexKey{test::TestId(obj), version, seg, complete};
}

IndexValue Value(uint32_t set, uint64_t offset, uint64_t length = 1000,
                 Timestamp ts = 1) {
  return IndexValue{set, offset, length, ts};
}

TEST(Index, InsertLookupRemove) {
  OperationalIndex index;
  index.Insert(Key(1, 10), Value(3, 0));
  const auto entries = index.LookupObject(test::TestId(1));
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(entries[0].second.zoneset_id, 3u);
  EXPECT_TRUE(index.LookupObject(test::TestId(2)).empty());
  EXPECT_TRUE(index.Remove(Key(1, 10)));
  EXPECT_FALSE(index.Remove(Key(1, 10)));
}

TEST(Index, VersionsSortedAscending) {
  OperationalIndex index;
  index.Insert(Key(7, 20), Value(1, 0));
  index.Insert(Key(7, 10), Value(2, 0));
  const auto entries = index.LookupObject(test::TestId(7));
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].first.version, 10u);
  EXPECT_EQ(entries[1].first.version, 20u);
}

TEST(Index, LatestCompleteVersionRules) {
  OperationalIndex index;
  index.Insert(Key(1, 10, 0, true), Value(1, 0));
  index.Insert(Key(1, 20, 0, false), Value(1, 100));  // incomplete v20
  EXPECT_EQ(index.LatestCompleteVersion(test::TestId(1)), 10u);

  index.Insert(Key(1, 20, 1, true), Value(1, 200));
  EXPECT_EQ(index.LatestCompleteVersion(test::TestId(1)), 20u);

  OperationalIndex only_incomplete;
  only_incomplete.Insert(Key(2, 5, 0, false), Value(1, 0));
  EXPECT_FALSE(only_incomplete.LatestCompleteVersion(test::TestId(2)));
}

TEST(Index, ChainedCompleteRequiresAllSegments) {
  OperationalIndex index;
  // complete entry names segment 2 but segment 1 is missing.
  index.Insert(Key(1, 10, 0, false), Value(1, 0));
  index.Insert(Key(1, 10, 2, true), Value(1, 200));
  EXPECT_EQ(index.LatestCompleteVersion(test::TestId(1)), 10u);
  EXPECT_FALSE(index.LatestCompleteChainedVersion(test::TestId(1)));
  index.Insert(Key(1, 10, 1, false), Value(1, 100));
  EXPECT_EQ(index.LatestCompleteChainedVersion(test::TestId(1)), 10u);
}

TEST(Index, RemoveVersionBounds) {
  OperationalIndex index;
  for (Timestamp v : {10u, 20u, 30u}) index.Insert(Key(1, v), Value(1, v));
  auto removed = index.RemoveVersionsBelow(test::TestId(1), 20);
  ASSERT_EQ(removed.size(), 1u);
  EXPECT_EQ(removed[0].first.version, 10u);
  removed = index.RemoveVersionsUpTo(test::TestId(1), 20);
  ASSERT_EQ(removed.size(), 1u);
  EXPECT_EQ(removed[0].first.version, 20u);
  EXPECT_EQ(index.LookupObject(test::TestId(1)).size(), 1u);
}

TEST(Index, UpdateIfEqualIsAtomicCompareAndSwap) {
  OperationalIndex index;
  index.Insert(Key(1, 10), Value(1, 0, 1000, 5));
  EXPECT_FALSE(index.UpdateIfEqual(Key(1, 10), Value(1, 0, 1000, 99),
                                   Value(2, 0, 1000, 6)));
  EXPECT_TRUE(index.UpdateIfEqual(Key(1, 10), Value(1, 0, 1000, 5),
                                  Value(2, 4096, 1000, 6)));
  IndexValue v;
  ASSERT_TRUE(index.Get(Key(1, 10), &v));
  EXPECT_EQ(v.zoneset_id, 2u);
}

// Prefix-scan completeness against a shadow sorted map.
TEST(Index, PrefixScanMatchesShadow) {
  OperationalIndex index;
  std::map<IndexKey, IndexValue> shadow;
  std::mt19937_64 rng(17);
  for (int i = 0; i < 5000; i++) {
    IndexKey key;
    key.object_id = test::TestId(rng() % 64);  // dense id space forces
    key.version = rng() % 16;                  // collisions and prefixes
    key.segment_id = static_cast<uint32_t>(rng() % 4);
    key.complete = rng() % 2 == 0;
    const IndexValue value = Value(static_cast<uint32_t>(rng() % 100),
                                   rng() % 1000000, rng() % 5000, rng());
    if (rng() % 4 == 0) {
      index.Remove(key);
      shadow.erase(key);
    } else {
      index.Insert(key, value);
      shadow[key] = value;
    }
  }
  for (uint64_t obj = 0; obj < 64; obj++) {
    const auto got = index.LookupObject(test::TestId(obj));
    std::vector<IndexEntry> want;
    for (const auto& [k, v] : shadow)
      if (k.object_id == test::TestId(obj)) want.push_back({k, v});
    EXPECT_EQ(got, want) << "object " << obj;
  }
  EXPECT_EQ(index.size(), shadow.size());
}

TEST(IndexImage, RoundTripAndValidation) {
  OperationalIndex index;
  std::mt19937_64 rng(23);
  for (int i = 0; i < 500; i++)
    index.Insert(Key(rng() % 100, rng() % 50, static_cast<uint32_t>(rng() % 8),
                     rng() % 2 == 0),
                 Value(static_cast<uint32_t>(rng() % 62), rng() % (1u << 23),
                       rng() % 100000, rng()));
  std::vector<uint8_t> image;
  ASSERT_OK(SerializeIndex(index, 42, 777, &image));

  OperationalIndex back;
  uint64_t id = 0;
  Timestamp created = 0;
  ASSERT_OK(DeserializeIndex(image, &back, &id, &created));
  EXPECT_EQ(id, 42u);
  EXPECT_EQ(created, 777u);
  EXPECT_EQ(back.Dump(), index.Dump());

  // Truncation -> incomplete; corruption -> corrupt.
  OperationalIndex junk;
  EXPECT_TRUE(DeserializeIndex(
                  std::span<const uint8_t>(image.data(), image.size() - 10),
                  &junk, nullptr, nullptr)
                  .IsSnapshotIncomplete());
  std::vector<uint8_t> mutated = image;
  mutated[40] ^= 0x10;
  EXPECT_TRUE(DeserializeIndex(mutated, &junk, nullptr, nullptr)
                  .IsSnapshotCorrupt());
}

TEST(IndexImage, EmptyIndexStillValid) {
  OperationalIndex index;
  std::vector<uint8_t> image;
  ASSERT_OK(SerializeIndex(index, 1, 2, &image));
  OperationalIndex back;
  ASSERT_OK(DeserializeIndex(image, &back, nullptr, nullptr));
  EXPECT_EQ(back.size(), 0u);
}

TEST(FlashIndex, RunsRoundTripWithLedger) {
  test::TempDir dir("flash");
  FlashIndexStore flash(dir.path());
  OperationalIndex index;
  index.Insert(Key(1, 10), Value(3, 0));
  index.Insert(Key(2, 20), Value(4, 8192));
  std::map<uint32_t, uint64_t> dead{{3, 12345}, {7, 999}};
  ASSERT_OK(flash.WriteRuns(index, 55, dead));

  OperationalIndex back;
  uint64_t seq = 0;
  std::map<uint32_t, uint64_t> dead_back;
  ASSERT_OK(flash.LoadRuns(&back, &seq, &dead_back));
  EXPECT_EQ(seq, 55u);
  EXPECT_EQ(back.Dump(), index.Dump());
  EXPECT_EQ(dead_back, dead);
}

TEST(FlashIndex, SnapshotFilesPruned) {
  test::TempDir dir("flash");
  FlashIndexStore flash(dir.path());
  std::vector<uint8_t> image{1, 2, 3};
  ASSERT_OK(flash.WriteSnapshotFile(1, image));
  ASSERT_OK(flash.WriteSnapshotFile(2, image));
  ASSERT_OK(flash.WriteSnapshotFile(3, image));
  flash.PruneSnapshots({3});
  std::vector<uint8_t> back;
  EXPECT_FALSE(flash.ReadSnapshotFile(1, &back).ok());
  EXPECT_FALSE(flash.ReadSnapshotFile(2, &back).ok());
  EXPECT_OK(flash.ReadSnapshotFile(3, &back));
  EXPECT_EQ(back, image);
}

}  // namespace
}  // namespace zonestore
