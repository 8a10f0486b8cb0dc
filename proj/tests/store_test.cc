// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/store.h"

#include <gtest/gtest.h>

#include <thread>

#include "test_util.h"
#include "zonestore/crc32c.h"

namespace zonestore {
namespace {

using test::TempDir;

TEST(Store, PutGetRoundTripAcrossSizes) {
  TempDir dir("store");
  auto options = test::SmallStoreOptions(dir, 32, 2ull << 20);
  std::unique_ptr<ObjectStore> store;
  ASSERT_OK(test::CreateAndOpen(options, &store));
  std::mt19937_64 rng(1);
  // Zero-length, sub-block, block-boundary, single- and multi-segment.
  const std::vector<size_t> sizes = {0,       1,       4095,    4096,
                                     65536,   1000000, 1048576, 3000000,
                                     5242880};
  std::vector<std::vector<uint8_t>> payloads;
  for (size_t i = 0; i < sizes.size(); i++) {
    payloads.push_back(test::RandomPayload(rng, sizes[i]));
    Timestamp version = 0;
    ASSERT_OK(store->Put(test::TestId(i), payloads.back(), &version));
    EXPECT_GT(version, 0u);
  }
  for (size_t i = 0; i < sizes.size(); i++) {
    std::vector<uint8_t> back;
    Timestamp version = 0;
    ASSERT_OK(store->Get(test::TestId(i), &back, &version));
    EXPECT_EQ(back, payloads[i]) << "size " << sizes[i];
  }
  ASSERT_OK(store->Close());
}

TEST(Store, SegmentationArithmetic) {
  TempDir dir("store");
  auto options = test::SmallStoreOptions(dir, 32, 4ull << 20);
  options.segment_bytes = 1ull << 20;
  std::unique_ptr<ObjectStore> store;
  ASSERT_OK(test::CreateAndOpen(options, &store));
  // 2.5 segments -> 3 segments, the last one complete.
  std::mt19937_64 rng(2);
  const auto payload = test::RandomPayload(rng, (2ull << 20) + (512ull << 10));
  ASSERT_OK(store->Put(test::TestId(1), payload, nullptr));
  ObjectStat stat;
  ASSERT_OK(store->Stat(test::TestId(1), &stat));
  EXPECT_EQ(stat.segment_count, 3u);
  EXPECT_EQ(stat.total_length, payload.size());

  int complete_entries = 0;
  uint32_t max_segment = 0;
  for (const auto& [key, value] : store->DumpIndex()) {
    if (!(key.object_id == test::TestId(1))) continue;
    if (key.complete) {
      complete_entries++;
      EXPECT_EQ(key.segment_id, 2u);
    }
    max_segment = std::max(max_segment, key.segment_id);
  }
  EXPECT_EQ(complete_entries, 1);
  EXPECT_EQ(max_segment, 2u);
  ASSERT_OK(store->Close());
}

TEST(Store, OverwriteRemovesOlderVersions) {
  TempDir dir("store");
  auto options = test::SmallStoreOptions(dir);
  std::unique_ptr<ObjectStore> store;
  ASSERT_OK(test::CreateAndOpen(options, &store));
  std::mt19937_64 rng(3);
  const auto v1 = test::RandomPayload(rng, 100000);
  const auto v2 = test::RandomPayload(rng, 50000);
  Timestamp t1 = 0, t2 = 0;
  ASSERT_OK(store->Put(test::TestId(1), v1, &t1));
  ASSERT_OK(store->Put(test::TestId(1), v2, &t2));
  EXPECT_GT(t2, t1);
  const auto entries = store->index()->LookupObject(test::TestId(1));
  for (const auto& [key, value] : entries) EXPECT_EQ(key.version, t2);
  std::vector<uint8_t> back;
  Timestamp version = 0;
  ASSERT_OK(store->Get(test::TestId(1), &back, &version));
  EXPECT_EQ(version, t2);
  EXPECT_EQ(back, v2);
  ASSERT_OK(store->Close());
}

TEST(Store, DeleteSemantics) {
  TempDir dir("store");
  auto options = test::SmallStoreOptions(dir);
  std::unique_ptr<ObjectStore> store;
  ASSERT_OK(test::CreateAndOpen(options, &store));
  bool existed = true;
  ASSERT_OK(store->Delete(test::TestId(404), &existed));
  EXPECT_FALSE(existed);

  std::mt19937_64 rng(4);
  ASSERT_OK(store->Put(test::TestId(1), test::RandomPayload(rng, 5000), nullptr));
  ASSERT_OK(store->Delete(test::TestId(1), &existed));
  EXPECT_TRUE(existed);
  std::vector<uint8_t> back;
  EXPECT_TRUE(store->Get(test::TestId(1), &back, nullptr).IsNotFound());
  ObjectStat stat;
  EXPECT_TRUE(store->Stat(test::TestId(1), &stat).IsNotFound());
  ASSERT_OK(store->Close());
}

TEST(Store, VersionsStrictlyIncrease) {
  TempDir dir("store");
  auto options = test::SmallStoreOptions(dir);
  std::unique_ptr<ObjectStore> store;
  ASSERT_OK(test::CreateAndOpen(options, &store));
  std::mt19937_64 rng(5);
  Timestamp last = 0;
  for (int i = 0; i < 20; i++) {
    Timestamp version = 0;
    ASSERT_OK(store->Put(test::TestId(i), test::RandomPayload(rng, 1000),
                         &version));
    EXPECT_GT(version, last);
    last = version;
  }
  ASSERT_OK(store->Close());
}

TEST(Store, StatZeroLengthObject) {
  TempDir dir("store");
  auto options = test::SmallStoreOptions(dir);
  std::unique_ptr<ObjectStore> store;
  ASSERT_OK(test::CreateAndOpen(options, &store));
  ASSERT_OK(store->Put(test::TestId(1), {}, nullptr));
  ObjectStat stat;
  ASSERT_OK(store->Stat(test::TestId(1), &stat));
  EXPECT_EQ(stat.total_length, 0u);
  EXPECT_EQ(stat.segment_count, 1u);
  std::vector<uint8_t> back{1, 2, 3};
  ASSERT_OK(store->Get(test::TestId(1), &back, nullptr));
  EXPECT_TRUE(back.empty());
  ASSERT_OK(store->Close());
}

TEST(Store, DegradedGetThroughParity) {
  TempDir dir("store");
  auto options = test::SmallStoreOptions(dir);
  std::unique_ptr<ObjectStore> store;
  ASSERT_OK(test::CreateAndOpen(options, &store));
  std::mt19937_64 rng(6);
  const auto payload = test::RandomPayload(rng, 400000);
  ASSERT_OK(store->Put(test::TestId(1), payload, nullptr));
  ASSERT_OK(store->FailDrive(3));
  std::vector<uint8_t> back;
  ASSERT_OK(store->Get(test::TestId(1), &back, nullptr));
  EXPECT_EQ(back, payload);
  EXPECT_GT(store->SampleMetrics().degraded_reads, 0u);
  // Two failed drives exceed single parity.
  ASSERT_OK(store->FailDrive(4));
  Status s = store->Get(test::TestId(1), &back, nullptr);
  EXPECT_TRUE(s.IsReadError()) << s.ToString();
}

TEST(Store, ReadYourWritesRandomized) {
  TempDir dir("store");
  auto options = test::SmallStoreOptions(dir, 32, 2ull << 20);
  std::unique_ptr<ObjectStore> store;
  ASSERT_OK(test::CreateAndOpen(options, &store));
  std::mt19937_64 rng(7);
  std::map<uint64_t, uint32_t> crcs;
  std::map<uint64_t, size_t> lens;
  for (int i = 0; i < 60; i++) {
    const uint64_t obj = rng() % 12;
    const size_t n = rng() % 300000;
    const auto payload = test::RandomPayload(rng, n);
    ASSERT_OK(store->Put(test::TestId(obj), payload, nullptr));
    crcs[obj] = crc32c::Value(payload.data(), payload.size());
    lens[obj] = n;
  }
  for (const auto& [obj, crc] : crcs) {
    std::vector<uint8_t> back;
    ASSERT_OK(store->Get(test::TestId(obj), &back, nullptr));
    EXPECT_EQ(back.size(), lens[obj]);
    EXPECT_EQ(crc32c::Value(back.data(), back.size()), crc);
  }
  ASSERT_OK(store->Close());
}

TEST(Store, ConcurrentPutsDistinctObjects) {
  TempDir dir("store");
  auto options = test::SmallStoreOptions(dir, 32, 2ull << 20);
  std::unique_ptr<ObjectStore> store;
  ASSERT_OK(test::CreateAndOpen(options, &store));
  constexpr int kThreads = 4;
  constexpr int kPerThread = 10;
  std::vector<std::thread> threads;
  std::vector<uint32_t> crcs(kThreads * kPerThread);
  for (int t = 0; t < kThreads; t++) {
    threads.emplace_back([&, t] {
      std::mt19937_64 rng(100 + t);
      for (int i = 0; i < kPerThread; i++) {
        const int obj = t * kPerThread + i;
        const auto payload = test::RandomPayload(rng, 50000 + 1000 * obj);
        crcs[obj] = crc32c::Value(payload.data(), payload.size());
        ASSERT_OK(store->Put(test::TestId(obj), payload, nullptr));
      }
    });
  }
  for (auto& t : threads) t.join();
  for (int obj = 0; obj < kThreads * kPerThread; obj++) {
    std::vector<uint8_t> back;
    ASSERT_OK(store->Get(test::TestId(obj), &back, nullptr));
    EXPECT_EQ(crc32c::Value(back.data(), back.size()), crcs[obj]);
  }
  ASSERT_OK(store->Close());
}

TEST(Store, CleanReopenPreservesEverything) {
  TempDir dir("store");
  auto options = test::SmallStoreOptions(dir);
  std::mt19937_64 rng(8);
  const auto a = test::RandomPayload(rng, 123456);
  const auto b = test::RandomPayload(rng, 7890);
  {
    std::unique_ptr<ObjectStore> store;
    ASSERT_OK(test::CreateAndOpen(options, &store));
    ASSERT_OK(store->Put(test::TestId(1), a, nullptr));
    ASSERT_OK(store->Put(test::TestId(2), b, nullptr));
    bool existed;
    ASSERT_OK(store->Delete(test::TestId(2), &existed));
    ASSERT_OK(store->Close());
  }
  RecoveryReport report;
  std::unique_ptr<ObjectStore> store;
  ASSERT_OK(ObjectStore::Open(options, &store, &report));
  EXPECT_TRUE(report.clean_shutdown_path);
  std::vector<uint8_t> back;
  ASSERT_OK(store->Get(test::TestId(1), &back, nullptr));
  EXPECT_EQ(back, a);
  EXPECT_TRUE(store->Get(test::TestId(2), &back, nullptr).IsNotFound());
  // The exact dead-space ledger survives a clean restart.
  bool match = false;
  std::string detail;
  ASSERT_OK(store->VerifyDeadLedger(&match, &detail));
  EXPECT_TRUE(match) << detail;
  ASSERT_OK(store->Close());
}

TEST(Store, SnapshotTransitionsClosedSetsToIndexed) {
  TempDir dir("store");
  auto options = test::SmallStoreOptions(dir, 32, 1ull << 20);
  options.segment_bytes = 256ull << 10;
  std::unique_ptr<ObjectStore> store;
  ASSERT_OK(test::CreateAndOpen(options, &store));
  std::mt19937_64 rng(9);
  for (int i = 0; i < 8; i++)
    ASSERT_OK(store->Put(test::TestId(i), test::RandomPayload(rng, 900000),
                         nullptr));
  ASSERT_OK(store->CloseOpenWriters());
  int closed_before = 0;
  for (const auto& info : store->SnapshotTable())
    if (info.state == ZoneSetState::kClosed) closed_before++;
  ASSERT_GT(closed_before, 0);
  ASSERT_OK(store->TakeSnapshot());
  int closed_after = 0, indexed = 0, index_sets = 0;
  for (const auto& info : store->SnapshotTable()) {
    if (info.state == ZoneSetState::kClosed) closed_after++;
    if (info.state == ZoneSetState::kIndexed) indexed++;
    if (info.state == ZoneSetState::kIndex) index_sets++;
  }
  EXPECT_EQ(closed_after, 0);
  EXPECT_EQ(indexed, closed_before);
  EXPECT_GE(index_sets, 1);
  ASSERT_OK(store->Close());
}

TEST(Store, SnapshotRotationTrimsOldIndexSets) {
  TempDir dir("store");
  auto options = test::SmallStoreOptions(dir);
  std::unique_ptr<ObjectStore> store;
  ASSERT_OK(test::CreateAndOpen(options, &store));
  std::mt19937_64 rng(10);
  ASSERT_OK(store->Put(test::TestId(1), test::RandomPayload(rng, 10000),
                       nullptr));
  ASSERT_OK(store->TakeSnapshot());
  ASSERT_OK(store->Put(test::TestId(2), test::RandomPayload(rng, 10000),
                       nullptr));
  ASSERT_OK(store->TakeSnapshot());
  int index_sets = 0;
  for (const auto& info : store->SnapshotTable())
    if (info.state == ZoneSetState::kIndex) index_sets++;
  // Only the newest snapshot's INDEX sets survive rotation.
  EXPECT_EQ(index_sets, 1);
  ASSERT_OK(store->Close());
}

TEST(Store, DeleteRacingNewerPutKeepsNewVersion) {
  TempDir dir("store");
  auto options = test::SmallStoreOptions(dir);
  std::unique_ptr<ObjectStore> store;
  ASSERT_OK(test::CreateAndOpen(options, &store));
  std::mt19937_64 rng(11);
  const auto v1 = test::RandomPayload(rng, 20000);
  const auto v2 = test::RandomPayload(rng, 30000);
  ASSERT_OK(store->Put(test::TestId(1), v1, nullptr));
  // The delete's timestamp precedes the newer put's version; replaying
  // them in either order must keep the newer version.
  bool existed;
  ASSERT_OK(store->Delete(test::TestId(1), &existed));
  ASSERT_OK(store->Put(test::TestId(1), v2, nullptr));
  std::vector<uint8_t> back;
  ASSERT_OK(store->Get(test::TestId(1), &back, nullptr));
  EXPECT_EQ(back, v2);
  ASSERT_OK(store->Close());
}

TEST(Store, AccountingIdentity) {
  TempDir dir("store");
  auto options = test::SmallStoreOptions(dir);
  std::unique_ptr<ObjectStore> store;
  ASSERT_OK(test::CreateAndOpen(options, &store));
  std::mt19937_64 rng(12);
  for (int i = 0; i < 10; i++)
    ASSERT_OK(store->Put(test::TestId(i), test::RandomPayload(rng, 200000),
                         nullptr));
  const MetricsSample sample = store->SampleMetrics();
  uint64_t by_drives = 0;
  for (const auto& info : store->SnapshotTable()) (void)info;
  by_drives = store->zoneset_manager()->TotalDeviceBytesAppended();
  EXPECT_EQ(sample.device_bytes_appended, by_drives);
  EXPECT_GT(sample.device_bytes_appended, sample.bytes_ingested);
  EXPECT_GT(sample.parity_bytes, 0u);
  ASSERT_OK(store->Close());
}

}  // namespace
}  // namespace zonestore
