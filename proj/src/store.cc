// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/store.h"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <random>

#include "zonestore/crc32c.h"

namespace zonestore {

namespace {

Status ValidateOptions(const StoreOptions& o) {
  if (o.data_dir.empty() || o.flash_dir.empty())
    return Status::InvalidArgument("data_dir and flash_dir are required");
  if (o.width != o.drive_count)
    return Status::InvalidArgument(
        "zone-set width must equal the drive count");
  if (o.width < 2) return Status::InvalidArgument("width must be >= 2");
  DriveGeometry g{0, o.zone_count, o.zone_capacity, o.block_size};
  if (!g.Valid()) return Status::InvalidArgument("bad drive geometry");
  if (o.zone_count <= o.superblock_zones_per_drive)
    return Status::InsufficientZones("zones per drive too few");
  if (o.segment_bytes == 0)
    return Status::InvalidArgument("segment_bytes must be positive");
  return Status::OK();
}

std::array<uint8_t, 16> RandomUuid() {
  std::array<uint8_t, 16> uuid{};
  std::random_device rd;
  for (auto& b : uuid) b = static_cast<uint8_t>(rd());
  return uuid;
}

}  // namespace

ObjectStore::ObjectStore(const StoreOptions& options) : options_(options) {}

ObjectStore::~ObjectStore() {
  // No persistence: destruction without Close() models a crash.
  if (gc_) gc_->Stop();
}

Status ObjectStore::Create(const StoreOptions& options) {
  Status s = ValidateOptions(options);
  if (!s.ok()) return s;
  if (std::filesystem::exists(
          Drive::StatePath(options.data_dir, /*drive_id=*/0)))
    return Status::InvalidArgument("directory already holds a store: " +
                                   options.data_dir);
  DriveArrayOptions array;
  array.dir = options.data_dir;
  array.drive_count = options.drive_count;
  array.zone_count = options.zone_count;
  array.zone_capacity = options.zone_capacity;
  array.block_size = options.block_size;
  std::vector<std::unique_ptr<Drive>> drives;
  s = OpenDriveArray(array, &drives);
  if (!s.ok()) return s;
  DriveMap map;
  for (auto& d : drives) map[d->geometry().drive_id] = d.get();

  ZoneSetManager zs(map, options.MakeZoneSetConfig(), nullptr);
  s = zs.InitTable();
  if (!s.ok()) return s;

  Superblock sb;
  sb.clean_shutdown = false;
  sb.logical_clock = 1;
  sb.block_size = options.block_size;
  sb.zone_capacity = options.zone_capacity;
  sb.zone_count = options.zone_count;
  sb.width = options.width;
  sb.superblock_zones_per_drive = options.superblock_zones_per_drive;
  for (auto& d : drives) {
    DriveDescriptor desc;
    desc.drive_id = d->geometry().drive_id;
    desc.zone_count = d->geometry().zone_count;
    desc.status = 0;
    desc.uuid = RandomUuid();
    sb.drives.push_back(desc);
  }
  for (const ZoneSetInfo& info : zs.SnapshotTable()) {
    ZoneSetRow row;
    row.zoneset_id = info.zoneset_id;
    row.state = info.state;
    row.dead_bytes = 0;
    row.members = info.members;
    sb.zone_sets.push_back(std::move(row));
  }
  SuperblockManager sbm(map, options.block_size,
                        options.superblock_zones_per_drive,
                        options.superblock_replicas);
  s = sbm.Write(&sb);
  if (!s.ok()) return s;
  std::filesystem::create_directories(options.flash_dir + "/index/current");
  for (auto& d : drives) {
    s = d->Close();
    if (!s.ok()) return s;
  }
  return Status::OK();
}

Status ObjectStore::Open(const StoreOptions& options,
                         std::unique_ptr<ObjectStore>* out,
                         RecoveryReport* report) {
  Status s = ValidateOptions(options);
  if (!s.ok()) return s;
  auto store = std::unique_ptr<ObjectStore>(new ObjectStore(options));
  s = store->OpenInternal(report);
  if (!s.ok()) return s;
  *out = std::move(store);
  return Status::OK();
}

Status ObjectStore::OpenInternal(RecoveryReport* report) {
  const std::vector<uint32_t> ids = Drive::ListDriveIds(options_.data_dir);
  if (ids.empty())
    return Status::NoSuperblock("no drives found in " + options_.data_dir);
  for (uint32_t id : ids) {
    DriveGeometry geom{id, options_.zone_count, options_.zone_capacity,
                       options_.block_size};
    std::unique_ptr<Drive> drive;
    Status s = Drive::Open(options_.data_dir, geom, &drive);
    if (!s.ok()) return s;
    drive_map_[id] = drive.get();
    drives_.push_back(std::move(drive));
  }

  Superblock sb;
  Status s = FindLatestSuperblock(drive_map_, options_.block_size,
                                  options_.superblock_zones_per_drive, &sb);
  if (!s.ok()) return s;
  if (sb.block_size != options_.block_size ||
      sb.zone_capacity != options_.zone_capacity ||
      sb.width != options_.width ||
      sb.zone_count != options_.zone_count ||
      sb.superblock_zones_per_drive != options_.superblock_zones_per_drive)
    return Status::GeometryMismatch("superblock disagrees with options");

  // Retire drives the superblock no longer lists as active.
  drive_descs_ = sb.drives;
  {
    std::vector<uint32_t> active;
    for (const DriveDescriptor& d : drive_descs_)
      if (d.status == 0) active.push_back(d.drive_id);
    DriveMap pruned;
    std::vector<std::unique_ptr<Drive>> kept;
    for (auto& drive : drives_) {
      const uint32_t id = drive->geometry().drive_id;
      if (std::find(active.begin(), active.end(), id) != active.end()) {
        pruned[id] = drive.get();
        kept.push_back(std::move(drive));
      }
    }
    if (pruned.size() != active.size())
      return Status::IOError("superblock names drives missing on disk");
    drive_map_ = std::move(pruned);
    drives_ = std::move(kept);
  }

  flash_ = std::make_unique<FlashIndexStore>(options_.flash_dir);
  index_ = std::make_unique<OperationalIndex>();
  std::vector<ZoneSetInfo> table;
  uint64_t sb_sequence = sb.sequence;
  bool clean_path = false;

  if (sb.clean_shutdown) {
    uint64_t flash_seq = 0;
    std::map<uint32_t, uint64_t> dead;
    auto from_flash = std::make_unique<OperationalIndex>();
    if (flash_->LoadRuns(from_flash.get(), &flash_seq, &dead).ok() &&
        flash_seq == sb.sequence) {
      clean_path = true;
      index_ = std::move(from_flash);
      for (const ZoneSetRow& row : sb.zone_sets) {
        ZoneSetInfo info;
        info.zoneset_id = row.zoneset_id;
        info.state = row.state;
        info.members = row.members;
        info.dead_bytes_snapshot = row.dead_bytes;
        auto it = dead.find(row.zoneset_id);
        info.dead_bytes = it != dead.end() ? it->second : 0;
        uint64_t max_wp = 0;
        for (const ZoneMember& m : row.members) {
          auto dit = drive_map_.find(m.drive_id);
          if (dit != drive_map_.end())
            max_wp = std::max(max_wp, dit->second->WritePointer(m.zone_id));
        }
        info.write_offset = max_wp;
        table.push_back(std::move(info));
      }
      {
        std::lock_guard<std::mutex> lk(snapshot_state_mu_);
        for (const SnapshotManifest& m : sb.manifests) {
          next_snapshot_id_ = std::max(next_snapshot_id_, m.snapshot_id + 1);
          if (m.complete) {
            manifests_.push_back(m);
            last_snapshot_created_at_ =
                std::max(last_snapshot_created_at_, m.created_at);
          }
        }
      }
      clock_.AdvanceTo(std::max(sb.logical_clock, index_->MaxTimestamp()));
      if (report) {
        *report = RecoveryReport();
        report->superblock_sequence = sb.sequence;
        report->clean_shutdown_path = true;
      }
    }
  }

  if (!clean_path) {
    RecoveredState state;
    RecoveryOptions ropts;
    Status rs = RecoverStore(drive_map_, options_.flash_dir,
                             options_.MakeZoneSetConfig(), ropts, &state,
                             report);
    if (!rs.ok()) return rs;
    index_ = std::move(state.index);
    table = state.table;
    sb_sequence = state.superblock.sequence;
    {
      std::lock_guard<std::mutex> lk(snapshot_state_mu_);
      manifests_ = state.manifests;
      next_snapshot_id_ = state.next_snapshot_id;
      last_snapshot_created_at_ = state.last_snapshot_created_at;
    }
    clock_.AdvanceTo(state.clock_floor);
  }

  sb_ = std::make_unique<SuperblockManager>(
      drive_map_, options_.block_size, options_.superblock_zones_per_drive,
      options_.superblock_replicas);
  sb_->SetSequence(sb_sequence);

  zs_ = std::make_unique<ZoneSetManager>(drive_map_,
                                         options_.MakeZoneSetConfig(),
                                         &metrics_);
  zs_->AdoptTable(table);
  zs_->SetSuperblockWriter([this] { return WriteSuperblock(false); });

  GreedyCollector::Context ctx;
  ctx.mgr = zs_.get();
  ctx.index = index_.get();
  ctx.clock = &clock_;
  ctx.metrics = &metrics_;
  ctx.mutation_gate = &mutation_gate_;
  ctx.last_snapshot_time = [this] { return last_snapshot_time(); };
  gc_ = std::make_unique<GreedyCollector>(ctx, options_.gc);
  if (options_.start_gc_thread) {
    gc_->Start();
    gc_running_ = true;
  }

  Status rs = zs_->ReplenishAvailable(options_.available_target, nullptr);
  if (!rs.ok() && !rs.IsOutOfSpace()) return rs;
  return Status::OK();
}

Status ObjectStore::BuildSuperblock(bool clean, Superblock* sb) {
  sb->clean_shutdown = clean;
  sb->logical_clock = clock_.Peek();
  sb->block_size = options_.block_size;
  sb->zone_capacity = options_.zone_capacity;
  sb->zone_count = options_.zone_count;
  sb->width = options_.width;
  sb->superblock_zones_per_drive = options_.superblock_zones_per_drive;
  sb->drives = drive_descs_;
  sb->zone_sets.clear();
  for (const ZoneSetInfo& info : zs_->SnapshotTable()) {
    ZoneSetRow row;
    row.zoneset_id = info.zoneset_id;
    row.state = info.state;
    // Superblocks persist the dead-space value frozen at the last snapshot;
    // the exact live ledger travels through the flash manifest instead and
    // is only trusted after a clean shutdown.
    row.dead_bytes = info.dead_bytes_snapshot;
    row.members = info.members;
    sb->zone_sets.push_back(std::move(row));
  }
  {
    std::lock_guard<std::mutex> lk(snapshot_state_mu_);
    sb->manifests = manifests_;
  }
  return Status::OK();
}

Status ObjectStore::WriteSuperblock(bool clean) {
  Superblock sb;
  Status s = BuildSuperblock(clean, &sb);
  if (!s.ok()) return s;
  return sb_->Write(&sb);
}

Status ObjectStore::EnsureForegroundWriter() {
  if (foreground_ && !foreground_->closed()) return Status::OK();
  foreground_.reset();
  Status s = zs_->OpenZoneSet(OpenPurpose::kForeground, &foreground_);
  if (!s.IsOutOfSpace()) return s;
  // On-demand cleaning: free a set, then retry once.
  s = gc_->EnsureFreeSets(options_.gc_reserve_sets + 1,
                          /*caller_holds_gate=*/true);
  if (!s.ok()) return s;
  return zs_->OpenZoneSet(OpenPurpose::kForeground, &foreground_);
}

Status ObjectStore::RotateForegroundWriter() {
  if (foreground_ && !foreground_->closed()) {
    Status s = foreground_->Close();
    if (!s.ok()) return s;
  }
  foreground_.reset();
  return Status::OK();
}

Status ObjectStore::AppendSegmentWithRetry(const SegmentMeta& meta,
                                           std::span<const uint8_t> payload,
                                           AppendResult* result) {
  for (int attempt = 0; attempt < 3; attempt++) {
    Status s = EnsureForegroundWriter();
    if (!s.ok()) return s;
    s = foreground_->AppendSegment(meta, payload, result);
    if (s.IsSegmentTooLarge()) {
      s = RotateForegroundWriter();
      if (!s.ok()) return s;
      continue;
    }
    return s;
  }
  return Status::OutOfSpace("segment does not fit a fresh zone set");
}

Status ObjectStore::AppendTombstoneWithRetry(const ObjectId& id,
                                             Timestamp version,
                                             AppendResult* result) {
  for (int attempt = 0; attempt < 3; attempt++) {
    Status s = EnsureForegroundWriter();
    if (!s.ok()) return s;
    s = foreground_->AppendTombstone(id, version, clock_.Next(), result);
    if (s.IsSegmentTooLarge()) {
      s = RotateForegroundWriter();
      if (!s.ok()) return s;
      continue;
    }
    return s;
  }
  return Status::OutOfSpace("tombstone does not fit a fresh zone set");
}

void ObjectStore::AccountRemovedEntries(const std::vector<IndexEntry>& removed) {
  for (const auto& [key, value] : removed)
    zs_->AddDeadBytes(value.zoneset_id,
                      ShapeSegment(value.length, options_.width,
                                   options_.block_size)
                          .total);
}

Status ObjectStore::Put(const ObjectId& id, std::span<const uint8_t> data,
                        Timestamp* version_out) {
  std::shared_lock<std::shared_mutex> gate(mutation_gate_);
  if (closed_) return Status::BadState("store is closed");
  const Timestamp version = clock_.Next();
  const uint64_t total = data.size();
  uint64_t done = 0;
  uint32_t segment_id = 0;

  // Segments are carved adaptively: up to segment_bytes, shrunk to the
  // space left in the open set when that still yields a reasonable tail.
  while (true) {
    std::lock_guard<std::mutex> wl(writer_mu_);
    for (uint32_t batch = 0; batch < options_.writer_batch_segments; batch++) {
      const uint64_t remaining = total - done;
      uint64_t want = std::min<uint64_t>(remaining, options_.segment_bytes);
      if (foreground_ && !foreground_->closed()) {
        const uint64_t fit = foreground_->MaxSegmentPayload();
        if (fit < want && fit >= options_.min_tail_segment_bytes &&
            want > options_.min_tail_segment_bytes)
          want = fit;
      }
      const bool last = done + want >= total;
      SegmentMeta meta;
      meta.object_id = id;
      meta.version = version;
      meta.segment_id = segment_id;
      meta.complete = last;
      meta.entry_timestamp = clock_.Next();
      AppendResult res;
      Status s = AppendSegmentWithRetry(
          meta, data.subspan(done, static_cast<size_t>(want)), &res);
      if (!s.ok()) return s;
      IndexKey key{id, version, segment_id, last};
      IndexValue value{res.zoneset_id, res.offset, want,
                       meta.entry_timestamp};
      index_->Insert(key, value);
      done += want;
      segment_id++;
      if (last) {
        const auto newest = index_->LatestCompleteChainedVersion(id);
        if (newest)
          AccountRemovedEntries(index_->RemoveVersionsBelow(id, *newest));
        metrics_.puts.fetch_add(1);
        metrics_.bytes_ingested.fetch_add(total);
        if (version_out) *version_out = version;
        return Status::OK();
      }
    }
    // Batch boundary: release the writer slot so concurrent writers can
    // interleave at whole-batch granularity.
  }
}

Status ObjectStore::GetLocked(const ObjectId& id, std::vector<uint8_t>* data,
                              Timestamp* version_out, bool final_attempt) {
  const std::vector<IndexEntry> entries = index_->LookupObject(id);
  std::optional<Timestamp> best;
  for (const auto& [key, value] : entries) {
    if (!key.complete) continue;
    if (best && *best >= key.version) continue;
    bool whole = true;
    for (uint32_t seg = 0; seg < key.segment_id && whole; seg++)
      whole = std::any_of(entries.begin(), entries.end(),
                          [&](const IndexEntry& e) {
                            return e.first.version == key.version &&
                                   e.first.segment_id == seg &&
                                   !e.first.complete;
                          });
    if (whole) best = key.version;
  }
  if (!best) return Status::NotFound(id.ToHex());

  std::vector<const IndexEntry*> chain;
  for (const auto& entry : entries)
    if (entry.first.version == *best) chain.push_back(&entry);
  std::sort(chain.begin(), chain.end(),
            [](const IndexEntry* a, const IndexEntry* b) {
              return a->first.segment_id < b->first.segment_id;
            });

  data->clear();
  for (const IndexEntry* entry : chain) {
    const IndexKey& key = entry->first;
    const IndexValue& value = entry->second;
    LayoutMarkerBlock expected;
    expected.record_type = RecordType::kSegment;
    expected.object_id = key.object_id;
    expected.version = key.version;
    expected.segment_id = key.segment_id;
    expected.complete = key.complete;
    expected.segment_length = value.length;
    expected.entry_timestamp = value.entry_timestamp;
    std::vector<uint8_t> payload;
    bool degraded = false;
    Status s;
    {
      std::shared_lock<std::shared_mutex> set_lk(
          zs_->SetLock(value.zoneset_id));
      s = zs_->ReadSegment(value.zoneset_id, value.offset, expected, &payload,
                           &degraded);
    }
    if (!s.ok()) {
      if (!final_attempt && s.IsReadError()) return s;  // caller retries
      return s;
    }
    data->insert(data->end(), payload.begin(), payload.end());
  }
  if (version_out) *version_out = *best;
  return Status::OK();
}

Status ObjectStore::Get(const ObjectId& id, std::vector<uint8_t>* data,
                        Timestamp* version_out) {
  Status s = GetLocked(id, data, version_out, /*final_attempt=*/false);
  if (s.IsReadError()) {
    // The segment may have been relocated between lookup and read.
    s = GetLocked(id, data, version_out, /*final_attempt=*/true);
  }
  if (s.ok()) metrics_.gets.fetch_add(1);
  return s;
}

Status ObjectStore::Delete(const ObjectId& id, bool* existed) {
  std::shared_lock<std::shared_mutex> gate(mutation_gate_);
  if (closed_) return Status::BadState("store is closed");
  const Timestamp stamp = clock_.Next();
  if (index_->LookupObject(id).empty()) {
    if (existed) *existed = false;
    return Status::OK();
  }
  AccountRemovedEntries(index_->RemoveVersionsUpTo(id, stamp));
  AppendResult res;
  {
    std::lock_guard<std::mutex> wl(writer_mu_);
    Status s = AppendTombstoneWithRetry(id, stamp, &res);
    if (!s.ok()) return s;
  }
  metrics_.deletes.fetch_add(1);
  if (existed) *existed = true;
  return Status::OK();
}

Status ObjectStore::Stat(const ObjectId& id, ObjectStat* stat) {
  const std::vector<IndexEntry> entries = index_->LookupObject(id);
  const auto best = index_->LatestCompleteChainedVersion(id);
  if (!best) return Status::NotFound(id.ToHex());
  stat->object_id = id;
  stat->version = *best;
  stat->total_length = 0;
  stat->segment_count = 0;
  for (const auto& [key, value] : entries) {
    if (key.version != *best) continue;
    stat->total_length += value.length;
    stat->segment_count++;
  }
  return Status::OK();
}

Timestamp ObjectStore::last_snapshot_time() const {
  std::lock_guard<std::mutex> lk(snapshot_state_mu_);
  return last_snapshot_created_at_;
}

Status ObjectStore::CopySnapshotToSmr(
    uint64_t snapshot_id, Timestamp created_at,
    std::span<const uint8_t> image,
    const std::vector<uint32_t>& indexed_candidates) {
  SnapshotManifest manifest;
  manifest.snapshot_id = snapshot_id;
  manifest.created_at = created_at;
  manifest.complete = false;
  manifest.total_length = image.size();
  manifest.content_checksum = crc32c::Value(image.data(), image.size());

  std::vector<SnapshotManifest> old_manifests;
  {
    std::lock_guard<std::mutex> lk(snapshot_state_mu_);
    old_manifests = manifests_;
  }

  std::unique_ptr<ZoneSetWriter> writer;
  uint64_t done = 0;
  uint32_t segment_id = 0;
  Status s;
  while (true) {
    if (!writer || writer->closed()) {
      s = zs_->OpenZoneSet(OpenPurpose::kIndexSnapshot, &writer);
      if (!s.ok()) return s;
      manifest.index_set_ids.push_back(writer->zoneset_id());
      // Publish the in-progress manifest before any content lands so a
      // crash mid-copy leaves only trimmable INDEX sets behind.
      {
        std::lock_guard<std::mutex> lk(snapshot_state_mu_);
        manifests_ = old_manifests;
        manifests_.push_back(manifest);
      }
      s = WriteSuperblock(false);
      if (!s.ok()) return s;
    }
    const uint64_t remaining = image.size() - done;
    uint64_t want = std::min<uint64_t>(remaining, options_.segment_bytes);
    const uint64_t fit = writer->MaxSegmentPayload();
    if (want > fit) want = fit;
    if (want == 0 && remaining > 0) {
      s = writer->Close();
      if (!s.ok()) return s;
      continue;
    }
    SegmentMeta meta;
    meta.object_id = SnapshotPayloadId();
    meta.version = snapshot_id;
    meta.segment_id = segment_id;
    meta.complete = done + want >= image.size();
    meta.entry_timestamp = created_at;
    AppendResult res;
    s = writer->AppendSegment(meta, image.subspan(done, want), &res);
    if (!s.ok()) return s;
    manifest.extents.push_back(
        SnapshotExtent{res.zoneset_id, res.offset, want});
    done += want;
    segment_id++;
    if (done >= image.size()) break;
  }
  if (writer && !writer->closed()) {
    s = writer->Close();
    if (!s.ok()) return s;
  }

  manifest.complete = true;
  {
    std::lock_guard<std::mutex> lk(snapshot_state_mu_);
    manifests_.clear();
    manifests_.push_back(manifest);
  }
  zs_->MarkIndexed(indexed_candidates);
  s = WriteSuperblock(false);
  if (!s.ok()) return s;
  {
    std::lock_guard<std::mutex> lk(snapshot_state_mu_);
    last_snapshot_created_at_ = created_at;
  }
  // The previous snapshot's INDEX sets are now unreferenced.
  for (const SnapshotManifest& old : old_manifests)
    for (uint32_t id : old.index_set_ids) zs_->TrimZoneSet(id);
  flash_->PruneSnapshots({snapshot_id});
  metrics_.snapshots_taken.fetch_add(1);
  return Status::OK();
}

Status ObjectStore::TakeSnapshot() {
  std::lock_guard<std::mutex> op(snapshot_op_mu_);
  const auto t0 = std::chrono::steady_clock::now();

  uint64_t snapshot_id;
  Timestamp created_at;
  std::vector<uint8_t> image;
  std::vector<uint32_t> closed_ids;
  {
    std::unique_lock<std::shared_mutex> gate(mutation_gate_);
    Status s = zs_->FlushActiveWriters();
    if (!s.ok()) return s;
    {
      std::lock_guard<std::mutex> lk(snapshot_state_mu_);
      snapshot_id = next_snapshot_id_++;
    }
    created_at = clock_.Next();
    s = SerializeIndex(*index_, snapshot_id, created_at, &image);
    if (!s.ok()) return s;
    zs_->FreezeDeadBytes();
    for (const ZoneSetInfo& info : zs_->SnapshotTable())
      if (info.state == ZoneSetState::kClosed)
        closed_ids.push_back(info.zoneset_id);
    s = flash_->WriteSnapshotFile(snapshot_id, image);
    if (!s.ok()) return s;
    metrics_.snapshot_quiesce_micros.fetch_add(
        static_cast<uint64_t>(std::chrono::duration_cast<
                                  std::chrono::microseconds>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count()));
  }
  // Mutations have resumed; the SMR copy proceeds in the background of the
  // client's timeline (synchronously here).
  return CopySnapshotToSmr(snapshot_id, created_at, image, closed_ids);
}

Status ObjectStore::RunGcOnce(uint64_t* reclaimed_bytes) {
  const auto victim = gc_->SelectVictim();
  if (!victim) {
    if (reclaimed_bytes) *reclaimed_bytes = 0;
    return Status::OK();
  }
  return gc_->CleanZoneSet(*victim, reclaimed_bytes,
                           /*caller_holds_gate=*/false);
}

Status ObjectStore::CloseOpenWriters() {
  std::lock_guard<std::mutex> wl(writer_mu_);
  if (foreground_ && !foreground_->closed()) {
    Status s = foreground_->Close();
    if (!s.ok()) return s;
  }
  foreground_.reset();
  return gc_->CloseDestination();
}

Status ObjectStore::Fsck(const FsckOptions& options, FsckReport* report) {
  std::unique_lock<std::shared_mutex> gate(mutation_gate_);
  Status s = zs_->FlushActiveWriters();
  if (!s.ok()) return s;
  return FsckStore(zs_.get(), *index_, options, report);
}

Status ObjectStore::VerifyDeadLedger(bool* match, std::string* detail) {
  std::unique_lock<std::shared_mutex> gate(mutation_gate_);
  Status s = zs_->FlushActiveWriters();
  if (!s.ok()) return s;
  std::map<uint32_t, uint64_t> by_scan;
  s = ComputeDeadBytesByScan(zs_.get(), *index_, &by_scan);
  if (!s.ok()) return s;
  std::map<uint32_t, uint64_t> in_memory = zs_->DeadBytesBySet();
  *match = true;
  for (const auto& [id, dead] : by_scan) {
    const uint64_t mem = in_memory.count(id) ? in_memory[id] : 0;
    if (mem != dead) {
      *match = false;
      if (detail)
        *detail += "set " + std::to_string(id) + ": scan " +
                   std::to_string(dead) + " vs ledger " +
                   std::to_string(mem) + "\n";
    }
    in_memory.erase(id);
  }
  for (const auto& [id, mem] : in_memory) {
    if (mem != 0) {
      *match = false;
      if (detail)
        *detail += "set " + std::to_string(id) + ": scan 0 vs ledger " +
                   std::to_string(mem) + "\n";
    }
  }
  return Status::OK();
}

Status ObjectStore::FailDrive(uint32_t drive_id) {
  auto it = drive_map_.find(drive_id);
  if (it == drive_map_.end())
    return Status::InvalidArgument("unknown drive " + std::to_string(drive_id));
  it->second->MarkFailed();
  return Status::OK();
}

void ObjectStore::ArmCrash(uint64_t crash_after_bytes) {
  injector_ = std::make_shared<FaultInjector>(crash_after_bytes);
  for (auto& drive : drives_) drive->SetFaultInjector(injector_);
}

bool ObjectStore::crash_fired() const {
  return injector_ && injector_->fired();
}

MetricsSample ObjectStore::SampleMetrics() const {
  MetricsSample s;
  s.bytes_ingested = metrics_.bytes_ingested.load();
  s.device_bytes_appended = zs_->TotalDeviceBytesAppended();
  s.parity_bytes = metrics_.parity_bytes.load();
  s.read_bytes = metrics_.read_bytes.load();
  s.puts = metrics_.puts.load();
  s.gets = metrics_.gets.load();
  s.deletes = metrics_.deletes.load();
  s.degraded_reads = metrics_.degraded_reads.load();
  s.bytes_relocated = metrics_.bytes_relocated.load();
  s.bytes_reclaimed = metrics_.bytes_reclaimed.load();
  s.cleans_completed = metrics_.cleans_completed.load();
  return s;
}

uint64_t ObjectStore::EstimateDataCapacity() const {
  const uint32_t k = options_.width - 1;
  const uint32_t bs = options_.block_size;
  const uint64_t seg_frag =
      ShapeSegment(options_.segment_bytes, options_.width, bs).fragment_stored;
  const uint64_t usable_zone = options_.zone_capacity - 4ull * bs;
  const uint64_t sets = zs_->set_count();
  const uint64_t reserved = options_.gc_reserve_sets + 2;  // snapshot room
  if (sets <= reserved) return 0;
  const double payload_ratio =
      static_cast<double>(options_.segment_bytes) /
      static_cast<double>(static_cast<uint64_t>(k) * (bs + seg_frag));
  return static_cast<uint64_t>(static_cast<double>(sets - reserved) *
                               static_cast<double>(k) *
                               static_cast<double>(usable_zone) *
                               payload_ratio);
}

Status ObjectStore::Close() {
  if (closed_) return Status::OK();
  if (gc_) gc_->Stop();
  gc_running_ = false;
  {
    std::unique_lock<std::shared_mutex> gate(mutation_gate_);
    Status s = CloseOpenWriters();
    if (!s.ok()) return s;
    s = WriteSuperblock(/*clean=*/true);
    if (!s.ok()) return s;
    s = flash_->WriteRuns(*index_, sb_->sequence(), zs_->DeadBytesBySet());
    if (!s.ok()) return s;
    closed_ = true;
  }
  for (auto& drive : drives_) {
    Status s = drive->Close();
    if (!s.ok()) return s;
  }
  return Status::OK();
}

// --- drive rebuild ---

Status ObjectStore::RebuildDrive(uint32_t failed_drive_id,
                                 RecoveryReport* report) {
  const auto t0 = std::chrono::steady_clock::now();
  if (gc_running_) gc_->Stop();
  std::unique_lock<std::shared_mutex> gate(mutation_gate_);
  Status s = CloseOpenWriters();
  if (!s.ok()) return s;

  auto failed_it = drive_map_.find(failed_drive_id);
  if (failed_it == drive_map_.end())
    return Status::InvalidArgument("unknown drive " +
                                   std::to_string(failed_drive_id));
  if (!failed_it->second->failed())
    return Status::InvalidArgument("drive is not marked failed");
  uint32_t failed_count = 0;
  for (const auto& [id, drive] : drive_map_)
    if (drive->failed()) failed_count++;
  if (failed_count > 1)
    return Status::TooManyMissing(
        "multiple drives failed; single-parity coding cannot rebuild");

  // Replacement drive: fresh backing files under a fresh drive id.
  uint32_t new_id = 0;
  for (const auto& [id, drive] : drive_map_) new_id = std::max(new_id, id + 1);
  for (const DriveDescriptor& d : drive_descs_)
    new_id = std::max(new_id, d.drive_id + 1);
  DriveGeometry geom{new_id, options_.zone_count, options_.zone_capacity,
                     options_.block_size};
  std::unique_ptr<Drive> replacement;
  s = Drive::Open(options_.data_dir, geom, &replacement);
  if (!s.ok()) return s;
  Drive* new_drive = replacement.get();
  drive_map_[new_id] = new_drive;
  drives_.push_back(std::move(replacement));
  zs_->ReplaceDrives(drive_map_);

  const uint32_t bs = options_.block_size;
  uint32_t rebuilt = 0;
  for (const ZoneSetInfo& info : zs_->SnapshotTable()) {
    size_t failed_pos = info.members.size();
    for (size_t i = 0; i < info.members.size(); i++)
      if (info.members[i].drive_id == failed_drive_id) failed_pos = i;
    if (failed_pos == info.members.size()) continue;
    const uint32_t zone_id = info.members[failed_pos].zone_id;

    std::vector<DigestEntry> records;
    const bool has_content = info.state == ZoneSetState::kClosed ||
                             info.state == ZoneSetState::kIndexed ||
                             info.state == ZoneSetState::kIndex;
    std::vector<uint8_t> digest_raw;
    if (has_content) {
      // Locate the raw digest bytes on any surviving member so the new
      // zone ends with a byte-identical replica.
      Status ds = Status::ReadError("no digest");
      for (const ZoneMember& m : info.members) {
        auto dit = drive_map_.find(m.drive_id);
        if (dit == drive_map_.end() || dit->second->failed()) continue;
        Drive* d = dit->second;
        const uint64_t wp = d->WritePointer(m.zone_id);
        if (wp < bs) continue;
        std::vector<uint8_t> tail(bs);
        if (!d->Read(m.zone_id, wp - bs, tail).ok()) continue;
        uint32_t blocks = 0;
        if (!DigestBlocksFromTailBlock(tail, &blocks).ok()) continue;
        const uint64_t total = static_cast<uint64_t>(blocks) * bs;
        if (total > wp) continue;
        digest_raw.resize(total);
        if (!d->Read(m.zone_id, wp - total, digest_raw).ok()) {
          digest_raw.clear();
          continue;
        }
        ZoneSetDigest decoded;
        if (DecodeDigest(digest_raw, &decoded).ok()) {
          records = std::move(decoded.entries);
          ds = Status::OK();
          break;
        }
        digest_raw.clear();
      }
      if (!ds.ok()) return Status::ReadError("zone set " +
                                             std::to_string(info.zoneset_id) +
                                             " has no readable digest");
    }

    s = zs_->ReplaceZone(info.zoneset_id, failed_drive_id,
                         ZoneMember{new_id, zone_id});
    if (!s.ok()) return s;
    if (!has_content) continue;

    for (const DigestEntry& e : records) {
      LayoutMarkerBlock lmb;
      lmb.record_type = e.record_type;
      lmb.object_id = e.object_id;
      lmb.version = e.version;
      lmb.segment_id = e.segment_id;
      lmb.complete = e.complete;
      lmb.segment_length = e.segment_length;
      lmb.fragment_length = e.fragment_length;
      lmb.entry_timestamp = e.entry_timestamp;
      lmb.payload_checksum = 0;

      std::vector<uint8_t> shard;
      if (e.record_type == RecordType::kSegment && e.fragment_length > 0) {
        // Rebuild this zone's fragment from the surviving shards.
        ShardSet shards(info.members.size());
        const ZoneSetInfo current = zs_->GetInfo(info.zoneset_id);
        uint32_t present = 0;
        for (size_t i = 0; i < current.members.size(); i++) {
          if (i == failed_pos) continue;
          const ZoneMember& m = current.members[i];
          auto dit = drive_map_.find(m.drive_id);
          if (dit == drive_map_.end() || dit->second->failed()) continue;
          std::vector<uint8_t> buf(bs + e.fragment_length);
          if (!dit->second->Read(m.zone_id, e.offset, buf).ok()) continue;
          LayoutMarkerBlock got;
          if (!DecodeLmb(std::span<const uint8_t>(buf.data(), bs), &got).ok())
            continue;
          if (got.object_id != e.object_id || got.version != e.version ||
              got.segment_id != e.segment_id ||
              got.entry_timestamp != e.entry_timestamp)
            continue;
          std::vector<uint8_t> frag(buf.begin() + bs, buf.end());
          if (crc32c::Value(frag.data(), frag.size()) != got.payload_checksum)
            continue;
          shards[i] = std::move(frag);
          present++;
        }
        if (present < info.members.size() - 1)
          return Status::ReadError("too many bad fragments in set " +
                                   std::to_string(info.zoneset_id));
        auto codec = MakeRaid4Codec(
            static_cast<uint32_t>(info.members.size()) - 1);
        s = codec->Reconstruct(&shards);
        if (!s.ok()) return s;
        shard = std::move(*shards[failed_pos]);
        lmb.payload_checksum = crc32c::Value(shard.data(), shard.size());
      }

      std::vector<uint8_t> block;
      s = EncodeLmb(lmb, bs, &block);
      if (!s.ok()) return s;
      uint64_t off = 0;
      s = new_drive->Append(zone_id, block, &off);
      if (!s.ok()) return s;
      if (!shard.empty()) {
        s = new_drive->Append(zone_id, shard, &off);
        if (!s.ok()) return s;
      }
    }
    if (!digest_raw.empty()) {
      uint64_t off = 0;
      s = new_drive->Append(zone_id, digest_raw, &off);
      if (!s.ok()) return s;
    }
    rebuilt++;
  }

  // Retire the failed drive and publish the new membership.
  for (DriveDescriptor& d : drive_descs_)
    if (d.drive_id == failed_drive_id) d.status = 1;
  DriveDescriptor fresh;
  fresh.drive_id = new_id;
  fresh.zone_count = options_.zone_count;
  fresh.status = 0;
  fresh.uuid = RandomUuid();
  drive_descs_.push_back(fresh);
  drive_map_.erase(failed_drive_id);
  zs_->ReplaceDrives(drive_map_);
  sb_->ReplaceDrives(drive_map_);
  s = WriteSuperblock(false);
  if (!s.ok()) return s;

  if (report) {
    *report = RecoveryReport();
    report->superblock_sequence = sb_->sequence();
    report->zone_sets_examined = rebuilt;
    report->wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
  }
  if (options_.start_gc_thread) {
    gc_->Start();
    gc_running_ = true;
  }
  return Status::OK();
}

}  // namespace zonestore
