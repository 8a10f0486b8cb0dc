// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#pragma once

#include <map>
#include <mutex>

#include "zonestore/layout.h"
#include "zonestore/zoneset.h"

namespace zonestore {

// Writes superblocks to the dedicated superblock zones (zone ids
// [0, superblock_zones_per_drive) of every drive), replicating each write to
// three drives by rotation. A full superblock zone is handled ping-pong
// style: the drive's next zone is reset and becomes current, which only
// destroys superblocks older than everything in the other zone.
class SuperblockManager {
 public:
  SuperblockManager(DriveMap drives, uint32_t block_size,
                    uint32_t sb_zones_per_drive, uint32_t replicas = 3);

  uint64_t sequence() const;
  void SetSequence(uint64_t sequence);

  // Stamps the next sequence and wall-clock time, then appends the encoded
  // superblock to the superblock zones of `replicas` healthy drives.
  Status Write(Superblock* sb);

  void ReplaceDrives(DriveMap drives);

  // Scans the superblock zones of every drive and returns the decodable
  // superblock with the highest sequence.
  static Status FindLatest(const DriveMap& drives, uint32_t block_size,
                           uint32_t sb_zones_per_drive, Superblock* out);

 private:
  Status AppendToDrive(Drive* drive, std::span<const uint8_t> encoded);

  mutable std::mutex mu_;
  DriveMap drives_;
  uint32_t block_size_;
  uint32_t sb_zones_per_drive_;
  uint32_t replicas_;
  uint64_t sequence_ = 0;
  std::map<uint32_t, uint32_t> cursor_;  // drive_id -> current sb zone
};

}  // namespace zonestore
