// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <vector>

#include "zonestore/codec.h"
#include "zonestore/layout.h"
#include "zonestore/metrics.h"
#include "zonestore/status.h"
#include "zonestore/zbd.h"

namespace zonestore {

using DriveMap = std::map<uint32_t, Drive*>;

// In-memory zone-set descriptor. dead_bytes is the accurate live statistic;
// dead_bytes_snapshot is the value frozen at the last index snapshot, which
// is what superblocks persist.
struct ZoneSetInfo {
  uint32_t zoneset_id = 0;
  ZoneSetState state = ZoneSetState::kEmpty;
  std::vector<ZoneMember> members;
  uint64_t write_offset = 0;  // per-zone content bytes
  uint64_t dead_bytes = 0;
  uint64_t dead_bytes_snapshot = 0;
};

struct ZoneSetConfig {
  uint32_t width = 0;
  uint32_t block_size = 4096;
  uint64_t zone_capacity = 0;
  uint32_t superblock_zones_per_drive = 2;
  uint64_t fifo_bytes = 2ull << 20;
  bool durable_acks = true;
  uint32_t available_target = 4;
  uint32_t available_low = 2;
  // Zone sets withheld from foreground opens so cleaning always has a
  // destination and can never deadlock at full occupancy.
  uint32_t gc_reserve_sets = 1;

  uint32_t data_shards() const { return width - 1; }
};

struct SegmentMeta {
  ObjectId object_id;
  Timestamp version = 0;
  uint32_t segment_id = 0;
  bool complete = false;
  Timestamp entry_timestamp = 0;
};

struct AppendResult {
  uint32_t zoneset_id = 0;
  uint64_t offset = 0;          // zone-set-relative offset of the marker block
  uint64_t per_zone_bytes = 0;  // marker block + stored fragment
};

enum class OpenPurpose { kForeground, kGarbageCollection, kIndexSnapshot };

class ZoneSetManager;

// Exclusive handle over one OPEN (or INDEX) zone set. Splits each segment
// into width-1 equal block-padded fragments plus one parity fragment and
// lands one marker block + fragment per zone at identical offsets, keeping
// the member write pointers in lockstep. Appends pass through per-zone FIFO
// buffers; with durable_acks the buffers are flushed before an append
// returns, otherwise buffered bytes are lost by an injected crash (the
// volatile stand-in for battery-backed buffers).
class ZoneSetWriter {
 public:
  ~ZoneSetWriter();

  uint32_t zoneset_id() const { return info_id_; }
  uint64_t write_offset() const;
  uint64_t durable_offset() const;
  size_t pending_entries() const;

  // Largest segment payload that currently fits under the space reserved
  // for the closing digest; 0 means the set is effectively full.
  uint64_t MaxSegmentPayload() const;

  Status AppendSegment(const SegmentMeta& meta,
                       std::span<const uint8_t> payload, AppendResult* out);
  Status AppendTombstone(const ObjectId& object_id, Timestamp version,
                         Timestamp entry_timestamp, AppendResult* out);
  Status Flush();
  // Flush, replicate the digest of everything appended to every zone, and
  // transition the set to CLOSED (INDEX sets keep their state).
  Status Close();
  bool closed() const { return closed_; }

 private:
  friend class ZoneSetManager;
  ZoneSetWriter(ZoneSetManager* mgr, uint32_t zoneset_id,
                std::vector<ZoneMember> members, ZoneSetState final_state);

  Status FlushZoneLocked(uint32_t zone_index);
  Status AppendRecordLocked(const LayoutMarkerBlock& base,
                            std::span<const std::vector<uint8_t>> fragments,
                            AppendResult* out);
  uint64_t MaxSegmentPayloadLocked() const;

  ZoneSetManager* mgr_;
  uint32_t info_id_;
  std::vector<ZoneMember> members_;
  ZoneSetState final_state_;
  mutable std::mutex mu_;
  std::vector<std::vector<uint8_t>> fifos_;
  uint64_t write_offset_ = 0;    // includes buffered bytes
  uint64_t durable_offset_ = 0;  // flushed bytes
  std::vector<DigestEntry> pending_digest_;
  bool closed_ = false;
};

// Zone-set table plus the striped I/O used by every higher layer. State
// transitions are internally synchronized; per-set shared locks arbitrate
// reads against trims.
class ZoneSetManager {
 public:
  ZoneSetManager(DriveMap drives, const ZoneSetConfig& config,
                 StoreMetrics* metrics);

  // Statically assigns every non-superblock zone to a zone set: zone i of
  // each drive joins set (i - superblock_zones). All sets start EMPTY.
  Status InitTable();
  // Adopts a table recovered from a superblock.
  void AdoptTable(const std::vector<ZoneSetInfo>& sets);

  // Called after transitions that must be persisted before proceeding
  // (EMPTY -> AVAILABLE). Installed by the store; tests may count calls.
  void SetSuperblockWriter(std::function<Status()> writer) {
    sb_writer_ = std::move(writer);
  }

  Status ReplenishAvailable(uint32_t target, std::vector<uint32_t>* newly);
  Status OpenZoneSet(OpenPurpose purpose, std::unique_ptr<ZoneSetWriter>* out);
  Status TrimZoneSet(uint32_t zoneset_id);
  Status ReplaceZone(uint32_t zoneset_id, uint32_t failed_drive,
                     ZoneMember donor);

  // Striped segment read with single-shard reconstruction. expected carries
  // the identity fields the marker blocks must match; entry_timestamp
  // mismatches surface as ReadError so callers can re-resolve relocations.
  Status ReadSegment(uint32_t zoneset_id, uint64_t offset,
                     const LayoutMarkerBlock& expected,
                     std::vector<uint8_t>* payload, bool* degraded);

  // Reads the digest that closes a zone set, from any healthy member.
  Status ReadDigest(uint32_t zoneset_id, ZoneSetDigest* out);

  // Accessors.
  ZoneSetInfo GetInfo(uint32_t zoneset_id) const;
  std::vector<ZoneSetInfo> SnapshotTable() const;
  size_t set_count() const { return sets_.size(); }
  uint32_t FreeSets() const;  // usable EMPTY + AVAILABLE
  uint32_t AvailableSets() const;
  const ZoneSetConfig& config() const { return config_; }
  const DriveMap& drives() const { return drives_; }
  StoreMetrics* metrics() { return metrics_; }

  void AddDeadBytes(uint32_t zoneset_id, uint64_t bytes);
  std::map<uint32_t, uint64_t> DeadBytesBySet() const;
  // Freezes the current dead-space values; superblocks persist the frozen
  // copy, which recovery uses as its per-set baseline.
  void FreezeDeadBytes();

  // Marks CLOSED sets from the given id list as INDEXED (snapshot done).
  void MarkIndexed(const std::vector<uint32_t>& ids);
  // State transition with validation; persists nothing by itself.
  Status SetState(uint32_t zoneset_id, ZoneSetState next);

  // Serializes every data-bearing record of the set into digest entries by
  // scanning marker blocks (used by recovery to close crashed-open sets,
  // and by fsck).
  Status WalkRecords(uint32_t zoneset_id, std::vector<DigestEntry>* out,
                     uint32_t* truncated_tail) const;

  // Replaces the active drive map after a rebuild.
  void ReplaceDrives(DriveMap drives);

  // Per-set shared locks (GETs) vs exclusive (trim).
  std::shared_mutex& SetLock(uint32_t zoneset_id) const {
    return set_locks_[zoneset_id];
  }

  // Ensures every byte below end_offset of the set is durable, flushing the
  // active writer's buffers when necessary (read-your-buffered-writes).
  Status EnsureDurable(uint32_t zoneset_id, uint64_t end_offset);
  // Flushes every active writer (snapshot quiesce, rebuild preparation).
  Status FlushActiveWriters();

  uint64_t TotalDeviceBytesAppended() const;

 private:
  friend class ZoneSetWriter;

  Drive* drive(uint32_t drive_id) const {
    auto it = drives_.find(drive_id);
    return it == drives_.end() ? nullptr : it->second;
  }
  bool SetUsable(const ZoneSetInfo& info) const;
  uint32_t FreeSetsLocked() const;
  Status ReplenishLocked(uint32_t target, std::vector<uint32_t>* newly);
  Status ReadZoneRange(const ZoneMember& m, uint64_t offset,
                       std::span<uint8_t> out) const;
  void WriterClosed(uint32_t zoneset_id, ZoneSetState final_state,
                    uint64_t write_offset);
  void WriterAbandoned(uint32_t zoneset_id);

  DriveMap drives_;
  ZoneSetConfig config_;
  StoreMetrics* metrics_;
  std::function<Status()> sb_writer_;

  // alloc_mu_ serializes open/replenish so a set never becomes openable
  // before the superblock that publishes it as AVAILABLE is durable.
  std::mutex alloc_mu_;
  mutable std::mutex mu_;
  std::vector<ZoneSetInfo> sets_;
  std::map<uint32_t, ZoneSetWriter*> active_writers_;
  mutable std::unique_ptr<std::shared_mutex[]> set_locks_;
  std::unique_ptr<ErasureCodec> codec_;
  uint32_t digest_read_rr_ = 0;
};

}  // namespace zonestore
