// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zonestore/status.h"
#include "zonestore/types.h"

namespace zonestore {

struct DriveGeometry {
  uint32_t drive_id = 0;
  uint32_t zone_count = 0;
  uint64_t zone_capacity = 0;  // bytes, multiple of block_size
  uint32_t block_size = 4096;  // power of two, >= 512

  bool Valid() const {
    return zone_count >= 1 && block_size >= 512 &&
           (block_size & (block_size - 1)) == 0 && zone_capacity > 0 &&
           zone_capacity % block_size == 0;
  }
};

struct ZoneDescriptor {
  uint32_t zone_id = 0;
  uint64_t write_pointer = 0;  // block-aligned, in [0, zone_capacity]
};

// Crash plan for recovery testing. Crashes trigger at block granularity
// only: an interrupted append leaves a block-aligned durable prefix and
// never a torn block.
struct FaultPlan {
  std::optional<uint64_t> crash_after_bytes;
  std::optional<uint32_t> fail_drive;
};

// Shared between all drives of a store so that an injected crash stops the
// whole array at one instant, like a process kill.
class FaultInjector {
 public:
  explicit FaultInjector(uint64_t crash_after_bytes)
      : budget_(static_cast<int64_t>(crash_after_bytes)), fired_(false) {}

  // Claims budget for an append of len bytes (a block multiple). Returns
  // how many bytes may become durable; anything less than len means the
  // crash fires on this operation.
  uint64_t Admit(uint64_t len, uint32_t block_size) {
    int64_t cur = budget_.load(std::memory_order_relaxed);
    while (true) {
      if (fired_.load(std::memory_order_acquire)) return 0;
      uint64_t room = cur > 0 ? static_cast<uint64_t>(cur) : 0;
      uint64_t durable = std::min<uint64_t>(len, AlignDown(room, block_size));
      if (budget_.compare_exchange_weak(cur, cur - static_cast<int64_t>(len),
                                        std::memory_order_acq_rel)) {
        if (durable < len) fired_.store(true, std::memory_order_release);
        return durable;
      }
    }
  }

  void Trip() { fired_.store(true, std::memory_order_release); }
  bool fired() const { return fired_.load(std::memory_order_acquire); }

 private:
  std::atomic<int64_t> budget_;
  std::atomic<bool> fired_;
};

// File-backed emulation of one host-managed SMR drive: every zone is
// sequential-write-only with a persistent write pointer, randomly readable
// below the write pointer, and erased as a unit by a reset.
//
// Backing layout: <dir>/drive<k>.dat holds zone i at byte i * zone_capacity
// (sparse); <dir>/drive<k>.state persists the write pointers and is
// rewritten on every append completion and on clean close.
//
// Appends to the same zone must not be issued concurrently (returns Busy);
// appends to distinct zones and any reads may run concurrently.
class Drive {
 public:
  static Status Open(const std::string& dir, const DriveGeometry& geometry,
                     std::unique_ptr<Drive>* out);
  ~Drive();

  Drive(const Drive&) = delete;
  Drive& operator=(const Drive&) = delete;

  Status Append(uint32_t zone_id, std::span<const uint8_t> data,
                uint64_t* offset_out);
  Status Read(uint32_t zone_id, uint64_t offset, std::span<uint8_t> out) const;
  Status ResetZone(uint32_t zone_id);
  std::vector<ZoneDescriptor> ReportZones() const;
  uint64_t WritePointer(uint32_t zone_id) const;

  const DriveGeometry& geometry() const { return geom_; }

  void SetFaultInjector(std::shared_ptr<FaultInjector> injector) {
    injector_ = std::move(injector);
  }
  bool crashed() const { return injector_ && injector_->fired(); }

  // Emulates a whole-drive failure: all subsequent I/O fails until the
  // drive is replaced. In-memory only; a reopen clears it.
  void MarkFailed() { failed_.store(true, std::memory_order_release); }
  bool failed() const { return failed_.load(std::memory_order_acquire); }

  // Durable bytes appended since open, for write-amplification accounting.
  uint64_t bytes_appended() const {
    return bytes_appended_.load(std::memory_order_relaxed);
  }

  Status Close();

  static std::string DataPath(const std::string& dir, uint32_t drive_id);
  static std::string StatePath(const std::string& dir, uint32_t drive_id);
  // Drive ids present in a directory, in ascending order.
  static std::vector<uint32_t> ListDriveIds(const std::string& dir);

 private:
  Drive(DriveGeometry geom, std::string dir);

  Status PersistState();
  Status CheckOperable(uint32_t zone_id) const;

  DriveGeometry geom_;
  std::string dir_;
  int data_fd_ = -1;
  int state_fd_ = -1;
  std::vector<std::atomic<uint64_t>> wps_;
  mutable std::vector<std::atomic<bool>> zone_busy_;
  std::shared_ptr<FaultInjector> injector_;
  std::atomic<bool> failed_{false};
  std::atomic<uint64_t> bytes_appended_{0};
  std::mutex state_mu_;
  bool closed_ = false;
};

struct DriveArrayOptions {
  std::string dir;
  uint32_t drive_count = 0;
  uint32_t zone_count = 0;
  uint64_t zone_capacity = 0;
  uint32_t block_size = 4096;
};

// Opens drives 0..drive_count-1 with a common geometry (creating them when
// absent). Used at init; after drive replacement the store opens the set of
// drives named by the superblock instead.
Status OpenDriveArray(const DriveArrayOptions& options,
                      std::vector<std::unique_ptr<Drive>>* out);

}  // namespace zonestore
