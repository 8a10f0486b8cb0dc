// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "zonestore/clock.h"
#include "zonestore/flash_index.h"
#include "zonestore/gc.h"
#include "zonestore/index.h"
#include "zonestore/metrics.h"
#include "zonestore/recovery.h"
#include "zonestore/superblock.h"
#include "zonestore/zbd.h"
#include "zonestore/zoneset.h"

namespace zonestore {

struct StoreOptions {
  std::string data_dir;
  std::string flash_dir;

  // Geometry (fixed at Create; validated against the superblock at Open).
  uint32_t drive_count = 6;
  uint32_t zone_count = 64;
  uint64_t zone_capacity = 8ull << 20;
  uint32_t block_size = 4096;
  uint32_t width = 6;  // data shards + 1 parity; must equal drive_count
  uint32_t superblock_zones_per_drive = 2;
  uint32_t superblock_replicas = 3;

  // Write path.
  uint64_t segment_bytes = 4ull << 20;  // pre-coding segment ceiling
  uint64_t min_tail_segment_bytes = 128ull << 10;
  uint64_t fifo_bytes = 2ull << 20;
  bool durable_acks = true;
  uint32_t writer_batch_segments = 12;

  // Allocation.
  uint32_t available_target = 4;
  uint32_t gc_reserve_sets = 1;

  GcPolicy gc;
  bool start_gc_thread = true;

  ZoneSetConfig MakeZoneSetConfig() const {
    ZoneSetConfig c;
    c.width = width;
    c.block_size = block_size;
    c.zone_capacity = zone_capacity;
    c.superblock_zones_per_drive = superblock_zones_per_drive;
    c.fifo_bytes = fifo_bytes;
    c.durable_acks = durable_acks;
    c.available_target = available_target;
    c.available_low = gc.low_watermark;
    c.gc_reserve_sets = gc_reserve_sets;
    return c;
  }
};

struct ObjectStat {
  ObjectId object_id;
  Timestamp version = 0;
  uint64_t total_length = 0;
  uint32_t segment_count = 0;
};

// Client-facing object store over an array of emulated zoned drives.
//
// Locking, outer to inner: mutation gate (PUT/DELETE/GC shared, snapshot
// and inspection exclusive) -> foreground writer slot -> per-set shared
// locks -> zone-set manager -> writer buffers -> index.
class ObjectStore {
 public:
  // Formats the drives and writes the first superblock. Fails on a
  // directory that already contains a formatted store.
  static Status Create(const StoreOptions& options);

  // Opens an existing store. After a clean shutdown the index loads from
  // the flash runs; otherwise crash recovery rebuilds it. The report (when
  // provided) describes whichever path ran.
  static Status Open(const StoreOptions& options,
                     std::unique_ptr<ObjectStore>* out,
                     RecoveryReport* report = nullptr);

  ~ObjectStore();

  Status Put(const ObjectId& id, std::span<const uint8_t> data,
             Timestamp* version);
  Status Get(const ObjectId& id, std::vector<uint8_t>* data,
             Timestamp* version);
  Status Delete(const ObjectId& id, bool* existed);
  Status Stat(const ObjectId& id, ObjectStat* stat);

  // Quiesces mutations, copies the index to flash, then stores the copy
  // into dedicated INDEX zone sets and retires the previous snapshot.
  Status TakeSnapshot();

  Status RunGcOnce(uint64_t* reclaimed_bytes);
  // Closes the foreground and GC destination sets (writing digests).
  Status CloseOpenWriters();

  Status Fsck(const FsckOptions& options, FsckReport* report);
  // Exact-ledger check used by the safety harness: quiesces, recomputes
  // dead bytes by scan, compares with the in-memory ledger.
  Status VerifyDeadLedger(bool* match, std::string* detail);

  // Drive failure handling. FailDrive marks a drive as dead (emulation);
  // RebuildDrive replaces it with a fresh drive and reconstructs every
  // affected zone via the erasure code and the replicated records.
  Status FailDrive(uint32_t drive_id);
  Status RebuildDrive(uint32_t failed_drive_id, RecoveryReport* report);

  // Arms crash injection: after roughly this many durable appended bytes,
  // the whole array stops accepting I/O, emulating a hard kill.
  void ArmCrash(uint64_t crash_after_bytes);
  bool crash_fired() const;

  Status Close();  // clean shutdown; further operations are invalid

  // Introspection.
  MetricsSample SampleMetrics() const;
  std::vector<ZoneSetInfo> SnapshotTable() const { return zs_->SnapshotTable(); }
  std::vector<IndexEntry> DumpIndex() const { return index_->Dump(); }
  const StoreOptions& options() const { return options_; }
  ZoneSetManager* zoneset_manager() { return zs_.get(); }
  OperationalIndex* index() { return index_.get(); }
  Timestamp last_snapshot_time() const;
  uint32_t FreeSets() const { return zs_->FreeSets(); }

  // Rough client-payload capacity of the data zone sets, given the
  // per-segment marker overhead at the configured segment size.
  uint64_t EstimateDataCapacity() const;

 private:
  ObjectStore(const StoreOptions& options);

  Status OpenInternal(RecoveryReport* report);
  Status BuildSuperblock(bool clean, Superblock* sb);
  Status WriteSuperblock(bool clean);
  Status AppendSegmentWithRetry(const SegmentMeta& meta,
                                std::span<const uint8_t> payload,
                                AppendResult* result);
  Status AppendTombstoneWithRetry(const ObjectId& id, Timestamp version,
                                  AppendResult* result);
  Status RotateForegroundWriter();
  Status EnsureForegroundWriter();
  Status CopySnapshotToSmr(uint64_t snapshot_id, Timestamp created_at,
                           std::span<const uint8_t> image,
                           const std::vector<uint32_t>& indexed_candidates);
  void AccountRemovedEntries(const std::vector<IndexEntry>& removed);
  Status GetLocked(const ObjectId& id, std::vector<uint8_t>* data,
                   Timestamp* version, bool final_attempt);

  StoreOptions options_;
  StoreMetrics metrics_;
  std::vector<std::unique_ptr<Drive>> drives_;
  DriveMap drive_map_;
  std::shared_ptr<FaultInjector> injector_;
  LogicalClock clock_;
  std::unique_ptr<FlashIndexStore> flash_;
  std::unique_ptr<SuperblockManager> sb_;
  std::unique_ptr<ZoneSetManager> zs_;
  std::unique_ptr<OperationalIndex> index_;
  std::unique_ptr<GreedyCollector> gc_;

  std::shared_mutex mutation_gate_;
  std::mutex writer_mu_;
  std::unique_ptr<ZoneSetWriter> foreground_;

  std::vector<DriveDescriptor> drive_descs_;

  std::mutex snapshot_op_mu_;  // one snapshot at a time
  mutable std::mutex snapshot_state_mu_;
  std::vector<SnapshotManifest> manifests_;
  uint64_t next_snapshot_id_ = 1;
  Timestamp last_snapshot_created_at_ = 0;

  bool gc_running_ = false;
  bool closed_ = false;
};

}  // namespace zonestore
