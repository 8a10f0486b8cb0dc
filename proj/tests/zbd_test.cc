// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/zbd.h"

#include <gtest/gtest.h>

#include <thread>

#include "test_util.h"

namespace zonestore {
namespace {

using test::TempDir;

DriveGeometry Geom(uint32_t zones = 64, uint64_t cap = 8ull << 20) {
  return DriveGeometry{0, zones, cap, 4096};
}

std::vector<uint8_t> Blocks(size_t n_blocks, uint8_t fill) {
  return std::vector<uint8_t>(n_blocks * 4096, fill);
}

TEST(Zbd, FreshDriveAllZonesEmpty) {
  TempDir dir("zbd");
  std::unique_ptr<Drive> drive;
  ASSERT_OK(Drive::Open(dir.path(), Geom(), &drive));
  for (const ZoneDescriptor& z : drive->ReportZones())
    EXPECT_EQ(z.write_pointer, 0u);
}

TEST(Zbd, AppendAdvancesAndPersists) {
  TempDir dir("zbd");
  {
    std::unique_ptr<Drive> drive;
    ASSERT_OK(Drive::Open(dir.path(), Geom(), &drive));
    uint64_t off = 1;
    ASSERT_OK(drive->Append(3, Blocks(2, 0xAB), &off));
    EXPECT_EQ(off, 0u);
    EXPECT_EQ(drive->WritePointer(3), 8192u);
    ASSERT_OK(drive->Close());
  }
  std::unique_ptr<Drive> drive;
  ASSERT_OK(Drive::Open(dir.path(), Geom(), &drive));
  EXPECT_EQ(drive->WritePointer(3), 8192u);
}

TEST(Zbd, GeometryMismatchRejected) {
  TempDir dir("zbd");
  {
    std::unique_ptr<Drive> drive;
    ASSERT_OK(Drive::Open(dir.path(), Geom(), &drive));
    ASSERT_OK(drive->Close());
  }
  std::unique_ptr<Drive> drive;
  Status s = Drive::Open(dir.path(), Geom(64, 4ull << 20), &drive);
  EXPECT_TRUE(s.IsGeometryMismatch()) << s.ToString();
  s = Drive::Open(dir.path(), Geom(32), &drive);
  EXPECT_TRUE(s.IsGeometryMismatch()) << s.ToString();
}

TEST(Zbd, ZoneFullGuard) {
  TempDir dir("zbd");
  std::unique_ptr<Drive> drive;
  ASSERT_OK(Drive::Open(dir.path(), Geom(4, 1ull << 20), &drive));
  const size_t cap_blocks = (1ull << 20) / 4096;
  uint64_t off = 0;
  ASSERT_OK(drive->Append(0, Blocks(cap_blocks - 1, 1), &off));
  Status s = drive->Append(0, Blocks(2, 2), &off);
  EXPECT_TRUE(s.IsZoneFull()) << s.ToString();
  EXPECT_EQ(drive->WritePointer(0), (1ull << 20) - 4096);
  ASSERT_OK(drive->Append(0, Blocks(1, 3), &off));
  EXPECT_EQ(drive->WritePointer(0), 1ull << 20);
}

TEST(Zbd, MisalignedRejected) {
  TempDir dir("zbd");
  std::unique_ptr<Drive> drive;
  ASSERT_OK(Drive::Open(dir.path(), Geom(), &drive));
  std::vector<uint8_t> odd(4100, 0);
  uint64_t off = 0;
  EXPECT_TRUE(drive->Append(0, odd, &off).IsMisaligned());
  ASSERT_OK(drive->Append(0, Blocks(1, 1), &off));
  std::vector<uint8_t> buf(100);
  EXPECT_TRUE(drive->Read(0, 0, buf).IsMisaligned());
  std::vector<uint8_t> block(4096);
  EXPECT_TRUE(drive->Read(0, 1, block).IsMisaligned());
}

TEST(Zbd, ReadYourWrites) {
  TempDir dir("zbd");
  std::unique_ptr<Drive> drive;
  ASSERT_OK(Drive::Open(dir.path(), Geom(), &drive));
  std::vector<uint8_t> data = Blocks(1, 0x5C);
  uint64_t off = 0;
  ASSERT_OK(drive->Append(7, data, &off));
  std::vector<uint8_t> back(4096);
  ASSERT_OK(drive->Read(7, 0, back));
  EXPECT_EQ(back, data);
}

TEST(Zbd, ReadPastWritePointer) {
  TempDir dir("zbd");
  std::unique_ptr<Drive> drive;
  ASSERT_OK(Drive::Open(dir.path(), Geom(), &drive));
  uint64_t off = 0;
  ASSERT_OK(drive->Append(0, Blocks(1, 1), &off));
  std::vector<uint8_t> buf(4096);
  Status s = drive->Read(0, 4096, buf);
  EXPECT_TRUE(s.IsReadPastWritePointer()) << s.ToString();
}

TEST(Zbd, ReadSpanningTwoAppends) {
  TempDir dir("zbd");
  std::unique_ptr<Drive> drive;
  ASSERT_OK(Drive::Open(dir.path(), Geom(), &drive));
  uint64_t off = 0;
  std::vector<uint8_t> first = Blocks(2, 0x11);
  std::vector<uint8_t> second = Blocks(3, 0x22);
  ASSERT_OK(drive->Append(0, first, &off));
  ASSERT_OK(drive->Append(0, second, &off));
  std::vector<uint8_t> expect = first;
  expect.insert(expect.end(), second.begin(), second.end());
  std::vector<uint8_t> back(expect.size());
  ASSERT_OK(drive->Read(0, 0, back));
  EXPECT_EQ(back, expect);
}

TEST(Zbd, ResetSemantics) {
  TempDir dir("zbd");
  std::unique_ptr<Drive> drive;
  ASSERT_OK(Drive::Open(dir.path(), Geom(), &drive));
  uint64_t off = 0;
  ASSERT_OK(drive->Append(2, Blocks(4, 9), &off));
  ASSERT_OK(drive->ResetZone(2));
  EXPECT_EQ(drive->WritePointer(2), 0u);
  std::vector<uint8_t> buf(4096);
  EXPECT_TRUE(drive->Read(2, 0, buf).IsReadPastWritePointer());
  ASSERT_OK(drive->ResetZone(2));  // idempotent
  EXPECT_EQ(drive->WritePointer(2), 0u);
}

TEST(Zbd, ReportZonesBookkeeping) {
  TempDir dir("zbd");
  std::unique_ptr<Drive> drive;
  ASSERT_OK(Drive::Open(dir.path(), Geom(), &drive));
  uint64_t off = 0;
  ASSERT_OK(drive->Append(1, Blocks(1, 1), &off));
  ASSERT_OK(drive->Append(5, Blocks(3, 2), &off));
  const auto zones = drive->ReportZones();
  EXPECT_EQ(zones[1].write_pointer, 4096u);
  EXPECT_EQ(zones[5].write_pointer, 12288u);
  EXPECT_EQ(zones[0].write_pointer, 0u);
}

TEST(Zbd, CrashTruncatesAtBlockBoundary) {
  TempDir dir("zbd");
  {
    std::unique_ptr<Drive> drive;
    ASSERT_OK(Drive::Open(dir.path(), Geom(), &drive));
    drive->SetFaultInjector(std::make_shared<FaultInjector>(6144));
    uint64_t off = 0;
    Status s = drive->Append(0, Blocks(2, 0xEE), &off);
    EXPECT_TRUE(s.IsCrashInjected()) << s.ToString();
    // Handle is dead from here on.
    EXPECT_TRUE(drive->Append(1, Blocks(1, 1), &off).IsCrashInjected());
  }
  std::unique_ptr<Drive> drive;
  ASSERT_OK(Drive::Open(dir.path(), Geom(), &drive));
  EXPECT_EQ(drive->WritePointer(0), 4096u);
  std::vector<uint8_t> back(4096);
  ASSERT_OK(drive->Read(0, 0, back));
  EXPECT_EQ(back, Blocks(1, 0xEE));
}

TEST(Zbd, SharedInjectorStopsAllDrives) {
  TempDir dir("zbd");
  std::unique_ptr<Drive> a, b;
  DriveGeometry ga = Geom();
  DriveGeometry gb = Geom();
  gb.drive_id = 1;
  ASSERT_OK(Drive::Open(dir.path(), ga, &a));
  ASSERT_OK(Drive::Open(dir.path(), gb, &b));
  auto injector = std::make_shared<FaultInjector>(4096);
  a->SetFaultInjector(injector);
  b->SetFaultInjector(injector);
  uint64_t off = 0;
  ASSERT_OK(a->Append(0, Blocks(1, 1), &off));
  EXPECT_TRUE(a->Append(0, Blocks(1, 1), &off).IsCrashInjected());
  EXPECT_TRUE(b->Append(0, Blocks(1, 1), &off).IsCrashInjected());
}

TEST(Zbd, FailedDriveErrors) {
  TempDir dir("zbd");
  std::unique_ptr<Drive> drive;
  ASSERT_OK(Drive::Open(dir.path(), Geom(), &drive));
  uint64_t off = 0;
  ASSERT_OK(drive->Append(0, Blocks(1, 1), &off));
  drive->MarkFailed();
  std::vector<uint8_t> buf(4096);
  EXPECT_TRUE(drive->Read(0, 0, buf).IsDriveFailed());
  EXPECT_TRUE(drive->Append(0, Blocks(1, 1), &off).IsDriveFailed());
}

TEST(Zbd, ConcurrentAppendsToDistinctZones) {
  TempDir dir("zbd");
  std::unique_ptr<Drive> drive;
  ASSERT_OK(Drive::Open(dir.path(), Geom(), &drive));
  std::vector<std::thread> threads;
  for (uint32_t z = 0; z < 8; z++) {
    threads.emplace_back([&, z] {
      for (int i = 0; i < 16; i++) {
        uint64_t off = 0;
        ASSERT_OK(drive->Append(z, Blocks(1, static_cast<uint8_t>(z)), &off));
        EXPECT_EQ(off, 4096ull * static_cast<uint64_t>(i));
      }
    });
  }
  for (auto& t : threads) t.join();
  for (uint32_t z = 0; z < 8; z++)
    EXPECT_EQ(drive->WritePointer(z), 4096u * 16);
}

// Randomized operation sequences against an in-memory shadow model. This is
// the emulator's definitive semantics test, including crash injection and
// reopen. The acceptance suite reruns it at 10k operations.
struct ShadowZone {
  std::vector<uint8_t> data;
};

void RunShadowModel(uint64_t seed, int ops, bool with_crashes) {
  TempDir dir("zbd-shadow");
  std::mt19937_64 rng(seed);
  const uint32_t zones = 8;
  const uint64_t cap = 64 * 4096;
  DriveGeometry geom{0, zones, cap, 4096};

  std::unique_ptr<Drive> drive;
  ASSERT_OK(Drive::Open(dir.path(), geom, &drive));
  std::vector<ShadowZone> shadow(zones);
  std::shared_ptr<FaultInjector> injector;
  int64_t crash_budget = -1;

  auto maybe_reopen = [&]() {
    if (!drive->crashed()) return;
    drive.reset();
    injector.reset();
    crash_budget = -1;
    ASSERT_OK(Drive::Open(dir.path(), geom, &drive));
  };

  for (int i = 0; i < ops; i++) {
    const uint32_t zone = static_cast<uint32_t>(rng() % zones);
    switch (rng() % 6) {
      case 0:
      case 1: {  // append
        const size_t blocks = 1 + rng() % 6;
        std::vector<uint8_t> data(blocks * 4096);
        for (auto& b : data) b = static_cast<uint8_t>(rng());
        uint64_t off = 0;
        Status s = drive->Append(zone, data, &off);
        ShadowZone& sz = shadow[zone];
        if (s.ok()) {
          ASSERT_EQ(off, sz.data.size());
          sz.data.insert(sz.data.end(), data.begin(), data.end());
          if (crash_budget >= 0) crash_budget -= static_cast<int64_t>(data.size());
        } else if (s.IsZoneFull()) {
          ASSERT_GT(sz.data.size() + data.size(), cap);
        } else if (s.IsCrashInjected()) {
          // Durable prefix: block-aligned remainder of the budget.
          uint64_t durable = 0;
          if (crash_budget > 0)
            durable = std::min<uint64_t>(
                AlignDown(static_cast<uint64_t>(crash_budget), 4096),
                data.size());
          sz.data.insert(sz.data.end(), data.begin(),
                         data.begin() + static_cast<ptrdiff_t>(durable));
          maybe_reopen();
        } else {
          FAIL() << s.ToString();
        }
        break;
      }
      case 2: {  // read
        const ShadowZone& sz = shadow[zone];
        if (sz.data.empty()) break;
        const uint64_t max_blocks = sz.data.size() / 4096;
        const uint64_t start = (rng() % max_blocks) * 4096;
        const uint64_t len =
            std::min<uint64_t>((1 + rng() % 4) * 4096, sz.data.size() - start);
        if (len == 0 || len % 4096 != 0) break;
        std::vector<uint8_t> buf(len);
        ASSERT_OK(drive->Read(zone, start, buf));
        ASSERT_TRUE(std::equal(buf.begin(), buf.end(),
                               sz.data.begin() + static_cast<ptrdiff_t>(start)));
        break;
      }
      case 3: {  // reset
        ASSERT_OK(drive->ResetZone(zone));
        shadow[zone].data.clear();
        break;
      }
      case 4: {  // report
        const auto zs = drive->ReportZones();
        for (uint32_t z = 0; z < zones; z++)
          ASSERT_EQ(zs[z].write_pointer, shadow[z].data.size());
        break;
      }
      case 5: {  // arm crash or reopen
        if (with_crashes && !injector && rng() % 4 == 0) {
          crash_budget = static_cast<int64_t>(rng() % (32 * 4096));
          injector = std::make_shared<FaultInjector>(
              static_cast<uint64_t>(crash_budget));
          drive->SetFaultInjector(injector);
        } else if (rng() % 8 == 0) {
          ASSERT_OK(drive->Close());
          drive.reset();
          injector.reset();
          crash_budget = -1;
          ASSERT_OK(Drive::Open(dir.path(), geom, &drive));
        }
        break;
      }
    }
  }
  // Final reopen must reproduce the shadow exactly.
  if (drive->crashed()) {
    drive.reset();
    ASSERT_OK(Drive::Open(dir.path(), geom, &drive));
  }
  const auto zs = drive->ReportZones();
  for (uint32_t z = 0; z < zones; z++) {
    ASSERT_EQ(zs[z].write_pointer, shadow[z].data.size()) << "zone " << z;
    if (!shadow[z].data.empty()) {
      std::vector<uint8_t> buf(shadow[z].data.size());
      ASSERT_OK(drive->Read(z, 0, buf));
      ASSERT_EQ(buf, shadow[z].data);
    }
  }
}

TEST(ZbdShadowModel, RandomOpsMatchShadow) {
  RunShadowModel(/*seed=*/42, /*ops=*/2000, /*with_crashes=*/false);
}

TEST(ZbdShadowModel, RandomOpsWithCrashes) {
  for (uint64_t seed = 1; seed <= 4; seed++)
    RunShadowModel(seed, 1500, /*with_crashes=*/true);
}

}  // namespace
}  // namespace zonestore
