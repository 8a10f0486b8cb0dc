// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/superblock.h"

#include <chrono>

namespace zonestore {

namespace {

uint64_t WallMicros() {
  return static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
}

}  // namespace

SuperblockManager::SuperblockManager(DriveMap drives, uint32_t block_size,
                                     uint32_t sb_zones_per_drive,
                                     uint32_t replicas)
    : drives_(std::move(drives)),
      block_size_(block_size),
      sb_zones_per_drive_(sb_zones_per_drive),
      replicas_(replicas) {
  for (const auto& [id, drive] : drives_) {
    uint32_t best = 0;
    uint64_t best_wp = 0;
    for (uint32_t z = 0; z < sb_zones_per_drive_; z++) {
      const uint64_t wp = drive->WritePointer(z);
      if (wp >= best_wp) {
        best_wp = wp;
        best = z;
      }
    }
    cursor_[id] = best;
  }
}

uint64_t SuperblockManager::sequence() const {
  std::lock_guard<std::mutex> lk(mu_);
  return sequence_;
}

void SuperblockManager::SetSequence(uint64_t sequence) {
  std::lock_guard<std::mutex> lk(mu_);
  sequence_ = sequence;
}

void SuperblockManager::ReplaceDrives(DriveMap drives) {
  std::lock_guard<std::mutex> lk(mu_);
  drives_ = std::move(drives);
  for (const auto& [id, drive] : drives_)
    if (cursor_.find(id) == cursor_.end()) cursor_[id] = 0;
}

Status SuperblockManager::AppendToDrive(Drive* drive,
                                        std::span<const uint8_t> encoded) {
  uint32_t& cur = cursor_[drive->geometry().drive_id];
  const uint64_t capacity = drive->geometry().zone_capacity;
  if (encoded.size() > capacity)
    return Status::OutOfSpace("superblock larger than a zone");
  if (drive->WritePointer(cur) + encoded.size() > capacity) {
    const uint32_t next = (cur + 1) % sb_zones_per_drive_;
    if (next == cur)
      return Status::OutOfSpace("single superblock zone exhausted");
    Status s = drive->ResetZone(next);
    if (!s.ok()) return s;
    cur = next;
  }
  uint64_t off = 0;
  return drive->Append(cur, encoded, &off);
}

Status SuperblockManager::Write(Superblock* sb) {
  std::lock_guard<std::mutex> lk(mu_);
  sb->sequence = sequence_ + 1;
  sb->written_at = WallMicros();
  std::vector<uint8_t> encoded;
  Status s = EncodeSuperblock(*sb, block_size_, &encoded);
  if (!s.ok()) return s;

  std::vector<Drive*> healthy;
  for (const auto& [id, drive] : drives_)
    if (!drive->failed()) healthy.push_back(drive);
  if (healthy.empty()) return Status::IOError("no healthy drives");
  const uint32_t copies =
      std::min<uint32_t>(replicas_, static_cast<uint32_t>(healthy.size()));
  const size_t start = static_cast<size_t>(sb->sequence) % healthy.size();
  uint32_t written = 0;
  Status last = Status::OK();
  for (size_t i = 0; i < healthy.size() && written < copies; i++) {
    Drive* drive = healthy[(start + i) % healthy.size()];
    s = AppendToDrive(drive, encoded);
    if (s.ok()) {
      written++;
    } else if (s.IsCrashInjected()) {
      return s;
    } else {
      last = s;
    }
  }
  if (written == 0) return last.ok() ? Status::IOError("superblock write failed") : last;
  sequence_ = sb->sequence;
  return Status::OK();
}

Status SuperblockManager::FindLatest(const DriveMap& drives,
                                     uint32_t block_size,
                                     uint32_t sb_zones_per_drive,
                                     Superblock* out) {
  bool found = false;
  Superblock best;
  for (const auto& [id, drive] : drives) {
    if (drive->failed()) continue;
    for (uint32_t z = 0; z < sb_zones_per_drive; z++) {
      const uint64_t wp = drive->WritePointer(z);
      uint64_t off = 0;
      std::vector<uint8_t> first(block_size);
      while (off + block_size <= wp) {
        Status s = drive->Read(z, off, first);
        if (!s.ok()) break;
        uint32_t blocks = 0;
        s = SuperblockBlocksFromHeader(first, &blocks);
        if (!s.ok()) break;
        const uint64_t total = static_cast<uint64_t>(blocks) * block_size;
        if (off + total > wp) break;  // torn tail
        std::vector<uint8_t> buf(total);
        s = drive->Read(z, off, buf);
        if (!s.ok()) break;
        Superblock candidate;
        s = DecodeSuperblock(buf, &candidate);
        if (s.ok() && (!found || candidate.sequence > best.sequence)) {
          best = std::move(candidate);
          found = true;
        }
        if (!s.ok()) break;
        off += total;
      }
    }
  }
  if (!found) return Status::NoSuperblock("no valid superblock found");
  *out = std::move(best);
  return Status::OK();
}

}  // namespace zonestore
