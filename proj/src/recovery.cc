// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/recovery.h"

#include <algorithm>
#include <chrono>
#include <random>
#include <set>
#include <sstream>

#include "zonestore/crc32c.h"
#include "zonestore/superblock.h"

namespace zonestore {

namespace {

const char* SourceName(SnapshotSource s) {
  switch (s) {
    case SnapshotSource::kNone:
      return "none";
    case SnapshotSource::kFlash:
      return "flash";
    case SnapshotSource::kSmr:
      return "smr";
  }
  return "?";
}

struct SetScan {
  uint32_t zoneset_id = 0;
  bool from_digest = false;
  std::vector<DigestEntry> records;
  uint64_t min_wp = 0;
  uint64_t max_wp = 0;
};

void WpBounds(const DriveMap& drives, const std::vector<ZoneMember>& members,
              uint64_t* min_wp, uint64_t* max_wp) {
  *min_wp = UINT64_MAX;
  *max_wp = 0;
  for (const ZoneMember& m : members) {
    auto it = drives.find(m.drive_id);
    if (it == drives.end() || it->second->failed()) continue;
    const uint64_t wp = it->second->WritePointer(m.zone_id);
    *min_wp = std::min(*min_wp, wp);
    *max_wp = std::max(*max_wp, wp);
  }
  if (*min_wp == UINT64_MAX) *min_wp = 0;
}

}  // namespace

ObjectId SnapshotPayloadId() {
  ObjectId id;
  id.bytes.fill(0xFF);
  return id;
}

std::string RecoveryReport::ToText() const {
  std::ostringstream out;
  out << "recovery report\n"
      << "  superblock sequence:   " << superblock_sequence << "\n"
      << "  path:                  "
      << (clean_shutdown_path ? "clean shutdown" : "replay") << "\n"
      << "  snapshot source:       " << SourceName(snapshot_source) << "\n"
      << "  snapshot id:           " << snapshot_id << "\n"
      << "  zone sets examined:    " << zone_sets_examined << "\n"
      << "  segments replayed:     " << segments_replayed << "\n"
      << "  segments skipped:      " << segments_skipped << "\n"
      << "  tombstones processed:  " << tombstones_processed << "\n"
      << "  incomplete tails:      " << incomplete_tails_truncated << "\n"
      << "  tail-safety drops:     " << entries_dropped_tail_safety << "\n"
      << "  wall seconds:          " << wall_seconds << "\n";
  return out.str();
}

std::string RecoveryReport::ToMetrics() const {
  std::ostringstream out;
  out << "superblock_sequence=" << superblock_sequence << "\n"
      << "clean_shutdown_path=" << (clean_shutdown_path ? 1 : 0) << "\n"
      << "snapshot_source=" << SourceName(snapshot_source) << "\n"
      << "snapshot_id=" << snapshot_id << "\n"
      << "zone_sets_examined=" << zone_sets_examined << "\n"
      << "segments_replayed=" << segments_replayed << "\n"
      << "segments_skipped=" << segments_skipped << "\n"
      << "tombstones_processed=" << tombstones_processed << "\n"
      << "incomplete_tails_truncated=" << incomplete_tails_truncated << "\n"
      << "entries_dropped_tail_safety=" << entries_dropped_tail_safety << "\n"
      << "wall_seconds=" << wall_seconds << "\n";
  return out.str();
}

ReplayOutcome ReplayRecord(const DigestEntry& record, uint32_t zoneset_id,
                           OperationalIndex* index, TombstoneSet* tombstones,
                           const DeadAttribution& on_removed) {
  if (record.record_type == RecordType::kTombstone) {
    tombstones->Note(record.object_id, record.version);
    const std::vector<IndexEntry> removed =
        index->RemoveVersionsUpTo(record.object_id, record.version);
    if (on_removed)
      for (const auto& [key, value] : removed)
        on_removed(value.zoneset_id, key, value);
    return ReplayOutcome::kTombstone;
  }

  if (record.object_id == SnapshotPayloadId())
    return ReplayOutcome::kSkippedReserved;

  const auto tomb = tombstones->MaxDeleted(record.object_id);
  if (tomb && *tomb >= record.version) return ReplayOutcome::kSkippedDeleted;

  const auto newest_complete = index->LatestCompleteVersion(record.object_id);
  if (newest_complete && *newest_complete > record.version)
    return ReplayOutcome::kSkippedSuperseded;

  IndexKey key;
  key.object_id = record.object_id;
  key.version = record.version;
  key.segment_id = record.segment_id;
  key.complete = record.complete;
  IndexValue next;
  next.zoneset_id = zoneset_id;
  next.offset = record.offset;
  next.length = record.segment_length;
  next.entry_timestamp = record.entry_timestamp;

  IndexValue existing;
  if (index->Get(key, &existing)) {
    if (existing.entry_timestamp > record.entry_timestamp)
      return ReplayOutcome::kSkippedRelocated;
    if (!(existing == next) && on_removed)
      on_removed(existing.zoneset_id, key, existing);
  }
  index->Insert(key, next);
  return ReplayOutcome::kAppliedSegment;
}

Status FindLatestSuperblock(const DriveMap& drives, uint32_t block_size,
                            uint32_t sb_zones_per_drive, Superblock* out) {
  return SuperblockManager::FindLatest(drives, block_size, sb_zones_per_drive,
                                       out);
}

namespace {

// Appends the reconstructed digest for a crashed-open set to every healthy
// member zone at its current write pointer, then marks the set CLOSED.
Status CloseScannedSet(const DriveMap& drives, ZoneSetManager* scratch,
                       const ZoneSetInfo& info,
                       const std::vector<DigestEntry>& records) {
  ZoneSetDigest digest{records};
  std::vector<uint8_t> encoded;
  Status s = EncodeDigest(digest, scratch->config().block_size, &encoded);
  if (!s.ok()) return s;
  for (const ZoneMember& m : info.members) {
    auto it = drives.find(m.drive_id);
    if (it == drives.end() || it->second->failed()) continue;
    uint64_t off = 0;
    s = it->second->Append(m.zone_id, encoded, &off);
    if (!s.ok()) return s;
  }
  return Status::OK();
}

}  // namespace

Status RecoverStore(const DriveMap& drives, const std::string& flash_dir,
                    const ZoneSetConfig& zs_config,
                    const RecoveryOptions& options, RecoveredState* out,
                    RecoveryReport* report) {
  const auto t0 = std::chrono::steady_clock::now();
  RecoveryReport local_report;
  RecoveryReport* rep = report ? report : &local_report;
  *rep = RecoveryReport();

  Superblock sb;
  Status s = FindLatestSuperblock(drives, zs_config.block_size,
                                  zs_config.superblock_zones_per_drive, &sb);
  if (!s.ok()) return s;
  rep->superblock_sequence = sb.sequence;
  if (sb.block_size != zs_config.block_size ||
      sb.zone_capacity != zs_config.zone_capacity ||
      sb.width != zs_config.width ||
      sb.superblock_zones_per_drive != zs_config.superblock_zones_per_drive)
    return Status::GeometryMismatch("superblock disagrees with options");

  out->superblock = sb;
  out->index = std::make_unique<OperationalIndex>();
  out->manifests.clear();
  out->next_snapshot_id = 1;
  out->last_snapshot_created_at = 0;

  // Table baseline from the superblock.
  std::vector<ZoneSetInfo> table;
  table.reserve(sb.zone_sets.size());
  for (const ZoneSetRow& row : sb.zone_sets) {
    ZoneSetInfo info;
    info.zoneset_id = row.zoneset_id;
    info.state = row.state;
    info.members = row.members;
    info.dead_bytes = row.dead_bytes;
    info.dead_bytes_snapshot = row.dead_bytes;
    table.push_back(std::move(info));
  }
  ZoneSetManager scratch(drives, zs_config, nullptr);
  scratch.AdoptTable(table);

  // Snapshot manifests: the newest complete one is the restore point;
  // in-progress ones are discarded (and their INDEX sets trimmed below).
  const SnapshotManifest* restore = nullptr;
  std::vector<uint32_t> discarded_index_sets;
  out->manifests.reserve(sb.manifests.size());
  for (const SnapshotManifest& m : sb.manifests) {
    out->next_snapshot_id = std::max(out->next_snapshot_id, m.snapshot_id + 1);
    if (m.complete) {
      out->manifests.push_back(m);
      if (restore == nullptr || m.snapshot_id > restore->snapshot_id)
        restore = &out->manifests.back();
    } else {
      for (uint32_t id : m.index_set_ids) discarded_index_sets.push_back(id);
    }
  }

  FlashIndexStore flash(flash_dir);
  if (restore != nullptr) {
    rep->snapshot_id = restore->snapshot_id;
    out->last_snapshot_created_at = restore->created_at;
    std::vector<uint8_t> image;
    bool loaded = false;
    if (flash.ReadSnapshotFile(restore->snapshot_id, &image).ok() &&
        image.size() == restore->total_length &&
        crc32c::Value(image.data(), image.size()) ==
            restore->content_checksum) {
      uint64_t id = 0;
      if (DeserializeIndex(image, out->index.get(), &id, nullptr).ok() &&
          id == restore->snapshot_id) {
        rep->snapshot_source = SnapshotSource::kFlash;
        loaded = true;
      }
    }
    if (!loaded) {
      // Flash copy unusable: reassemble the image from the INDEX zone sets.
      image.clear();
      bool smr_ok = true;
      for (size_t i = 0; i < restore->extents.size() && smr_ok; i++) {
        const SnapshotExtent& e = restore->extents[i];
        LayoutMarkerBlock expected;
        expected.record_type = RecordType::kSegment;
        expected.object_id = SnapshotPayloadId();
        expected.version = restore->snapshot_id;
        expected.segment_id = static_cast<uint32_t>(i);
        expected.complete = i + 1 == restore->extents.size();
        expected.segment_length = e.length;
        expected.entry_timestamp = restore->created_at;
        std::vector<uint8_t> part;
        bool degraded = false;
        Status rs =
            scratch.ReadSegment(e.zoneset_id, e.offset, expected, &part,
                                &degraded);
        if (!rs.ok()) {
          smr_ok = false;
          break;
        }
        image.insert(image.end(), part.begin(), part.end());
      }
      if (smr_ok && image.size() == restore->total_length &&
          crc32c::Value(image.data(), image.size()) ==
              restore->content_checksum) {
        uint64_t id = 0;
        if (DeserializeIndex(image, out->index.get(), &id, nullptr).ok() &&
            id == restore->snapshot_id) {
          rep->snapshot_source = SnapshotSource::kSmr;
          loaded = true;
          if (!options.read_only)
            flash.WriteSnapshotFile(restore->snapshot_id, image);
        }
      }
      if (!loaded)
        return Status::UnrecoverableSnapshot(
            "superblock references snapshot " +
            std::to_string(restore->snapshot_id) +
            " but neither the flash nor the SMR copy validates");
    }
  }

  // Per-set disposition.
  std::set<uint32_t> kept_index_sets;
  for (const SnapshotManifest& m : out->manifests)
    for (uint32_t id : m.index_set_ids) kept_index_sets.insert(id);

  std::vector<SetScan> scans;
  std::vector<uint32_t> trim_now;
  std::map<uint32_t, std::pair<uint64_t, uint64_t>> wp_bounds;  // min,max
  std::vector<ZoneSetInfo> working = scratch.SnapshotTable();
  for (ZoneSetInfo& info : working) {
    uint64_t min_wp = 0, max_wp = 0;
    WpBounds(drives, info.members, &min_wp, &max_wp);
    wp_bounds[info.zoneset_id] = {min_wp, max_wp};
    switch (info.state) {
      case ZoneSetState::kEmpty:
        // Marked EMPTY in the superblock means actually empty; never read.
        break;
      case ZoneSetState::kIndexed:
        // Write-pointer check only; a trimmed set shows up empty here.
        if (max_wp == 0) {
          info.state = ZoneSetState::kEmpty;
          info.dead_bytes = 0;
          info.dead_bytes_snapshot = 0;
        } else {
          info.write_offset = max_wp;
        }
        break;
      case ZoneSetState::kIndex:
        if (kept_index_sets.count(info.zoneset_id)) {
          info.write_offset = max_wp;
        } else {
          trim_now.push_back(info.zoneset_id);
        }
        break;
      case ZoneSetState::kAvailable:
      case ZoneSetState::kOpen:
      case ZoneSetState::kClosed: {
        if (max_wp == 0) {
          info.state = ZoneSetState::kEmpty;
          info.write_offset = 0;
          info.dead_bytes = 0;
          break;
        }
        SetScan scan;
        scan.zoneset_id = info.zoneset_id;
        scan.min_wp = min_wp;
        scan.max_wp = max_wp;
        ZoneSetDigest digest;
        if (scratch.ReadDigest(info.zoneset_id, &digest).ok()) {
          scan.from_digest = true;
          for (const DigestEntry& e : digest.entries) {
            const uint64_t end = e.offset + zs_config.block_size +
                                 e.fragment_length;
            if (end <= min_wp) {
              scan.records.push_back(e);
            } else {
              rep->incomplete_tails_truncated++;
            }
          }
        } else {
          uint32_t truncated = 0;
          Status ws =
              scratch.WalkRecords(info.zoneset_id, &scan.records, &truncated);
          if (!ws.ok()) return ws;
          rep->incomplete_tails_truncated += truncated;
        }
        info.write_offset = max_wp;
        scans.push_back(std::move(scan));
        break;
      }
    }
  }

  if (options.scan_order_seed) {
    std::mt19937_64 rng(*options.scan_order_seed);
    std::shuffle(scans.begin(), scans.end(), rng);
  }

  // Replay. Dead space freed from unscanned (INDEXED) sets is attributed on
  // top of their superblock baseline; scanned sets are recomputed below.
  std::set<uint32_t> scanned_ids;
  for (const SetScan& scan : scans) scanned_ids.insert(scan.zoneset_id);
  std::map<uint32_t, ZoneSetInfo*> by_id;
  for (ZoneSetInfo& info : working) by_id[info.zoneset_id] = &info;

  TombstoneSet tombstones;
  auto attribute = [&](uint32_t zoneset_id, const IndexKey& key,
                       const IndexValue& value) {
    if (scanned_ids.count(zoneset_id)) return;
    auto it = by_id.find(zoneset_id);
    if (it == by_id.end()) return;
    if (it->second->state != ZoneSetState::kIndexed) return;
    it->second->dead_bytes +=
        ShapeSegment(value.length, zs_config.width, zs_config.block_size)
            .total;
  };

  for (const SetScan& scan : scans) {
    rep->zone_sets_examined++;
    for (const DigestEntry& record : scan.records) {
      const ReplayOutcome outcome = ReplayRecord(
          record, scan.zoneset_id, out->index.get(), &tombstones, attribute);
      switch (outcome) {
        case ReplayOutcome::kAppliedSegment:
          rep->segments_replayed++;
          break;
        case ReplayOutcome::kTombstone:
          rep->tombstones_processed++;
          break;
        case ReplayOutcome::kSkippedReserved:
          break;
        default:
          rep->segments_skipped++;
      }
    }
  }

  // Supersession normalization: exactly what a completed PUT does in
  // memory, so that versions overwritten before the crash do not linger.
  for (const ObjectId& id : out->index->ObjectIds()) {
    const auto latest = out->index->LatestCompleteChainedVersion(id);
    if (!latest) continue;
    const std::vector<IndexEntry> removed =
        out->index->RemoveVersionsBelow(id, *latest);
    for (const auto& [key, value] : removed)
      attribute(value.zoneset_id, key, value);
  }

  // Tail safety: no entry may reference bytes at or beyond a write pointer.
  // Scanned sets are valid targets regardless of their pre-recovery state;
  // anything else must still be INDEXED (snapshot-covered) to be referenced.
  for (const auto& [key, value] : out->index->Dump()) {
    auto it = by_id.find(value.zoneset_id);
    bool drop = false;
    if (it == by_id.end()) {
      drop = true;
    } else if (!scanned_ids.count(value.zoneset_id) &&
               it->second->state != ZoneSetState::kIndexed) {
      drop = true;
    } else {
      const SegmentShape shape = ShapeSegment(value.length, zs_config.width,
                                              zs_config.block_size);
      const uint64_t end =
          value.offset + zs_config.block_size + shape.fragment_stored;
      if (end > wp_bounds[value.zoneset_id].first) drop = true;
    }
    if (drop) {
      out->index->Remove(key);
      rep->entries_dropped_tail_safety++;
    }
  }

  // Recompute dead space for scanned sets: all segment bytes found minus
  // the segment bytes the final index still references there.
  std::map<uint32_t, uint64_t> live_by_set;
  out->index->ForEach([&](const IndexKey& key, const IndexValue& value) {
    if (!scanned_ids.count(value.zoneset_id)) return;
    live_by_set[value.zoneset_id] +=
        ShapeSegment(value.length, zs_config.width, zs_config.block_size)
            .total;
  });
  for (const SetScan& scan : scans) {
    uint64_t content = 0;
    for (const DigestEntry& record : scan.records)
      if (record.record_type == RecordType::kSegment)
        content += ShapeSegment(record.segment_length, zs_config.width,
                                zs_config.block_size)
                       .total;
    ZoneSetInfo* info = by_id[scan.zoneset_id];
    const uint64_t live = live_by_set[scan.zoneset_id];
    info->dead_bytes = content > live ? content - live : 0;
  }

  // Close-out phase (skipped in read-only mode): walked sets become CLOSED
  // behind a reconstructed digest (or are trimmed when nothing valid
  // remains), stale INDEX sets are trimmed, and a fresh superblock records
  // the settled state.
  for (uint32_t id : discarded_index_sets) trim_now.push_back(id);
  for (const SetScan& scan : scans) {
    ZoneSetInfo* info = by_id[scan.zoneset_id];
    if (scan.from_digest) {
      info->state = ZoneSetState::kClosed;
      continue;
    }
    if (scan.records.empty()) {
      trim_now.push_back(scan.zoneset_id);
      continue;
    }
    if (!options.read_only) {
      Status cs = CloseScannedSet(drives, &scratch, *info, scan.records);
      if (!cs.ok()) return cs;
      uint64_t min_wp = 0, max_wp = 0;
      WpBounds(drives, info->members, &min_wp, &max_wp);
      info->write_offset = max_wp;
    }
    info->state = ZoneSetState::kClosed;
  }
  for (uint32_t id : trim_now) {
    auto found = by_id.find(id);
    if (found == by_id.end()) continue;
    ZoneSetInfo* info = found->second;
    if (!options.read_only) {
      for (const ZoneMember& m : info->members) {
        auto it = drives.find(m.drive_id);
        if (it == drives.end() || it->second->failed()) continue;
        Status ts = it->second->ResetZone(m.zone_id);
        if (!ts.ok()) return ts;
      }
    }
    info->state = ZoneSetState::kEmpty;
    info->write_offset = 0;
    info->dead_bytes = 0;
    info->dead_bytes_snapshot = 0;
  }

  // Clock floor: above everything seen anywhere.
  Timestamp floor = sb.logical_clock;
  floor = std::max(floor, out->index->MaxTimestamp());
  for (const SetScan& scan : scans)
    for (const DigestEntry& record : scan.records) {
      floor = std::max(floor, record.version);
      floor = std::max(floor, record.entry_timestamp);
    }
  for (const SnapshotManifest& m : out->manifests)
    floor = std::max(floor, m.created_at);
  out->clock_floor = floor;

  out->table = working;

  if (!options.read_only) {
    Superblock next = sb;
    next.clean_shutdown = false;
    next.logical_clock = floor;
    next.manifests = out->manifests;
    next.zone_sets.clear();
    for (const ZoneSetInfo& info : working) {
      ZoneSetRow row;
      row.zoneset_id = info.zoneset_id;
      row.state = info.state;
      row.dead_bytes = info.dead_bytes_snapshot;
      row.members = info.members;
      next.zone_sets.push_back(std::move(row));
    }
    SuperblockManager sbm(drives, zs_config.block_size,
                          zs_config.superblock_zones_per_drive);
    sbm.SetSequence(sb.sequence);
    Status ws = sbm.Write(&next);
    if (!ws.ok()) return ws;
    out->superblock = next;
  }

  rep->wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return Status::OK();
}

// --- fsck ---

namespace {

Status ScanSetForFsck(ZoneSetManager* mgr, const ZoneSetInfo& info,
                      std::vector<DigestEntry>* records, uint64_t* min_wp,
                      uint64_t* max_wp) {
  WpBounds(mgr->drives(), info.members, min_wp, max_wp);
  if (*max_wp == 0) return Status::OK();
  uint32_t truncated = 0;
  return mgr->WalkRecords(info.zoneset_id, records, &truncated);
}

}  // namespace

std::string FsckReport::ToText() const {
  std::ostringstream out;
  out << "fsck report\n"
      << "  sets scanned:        " << sets_scanned << "\n"
      << "  entries checked:     " << entries_checked << "\n"
      << "  missing records:     " << missing_records << "\n"
      << "  checksum failures:   " << checksum_failures << "\n"
      << "  tail violations:     " << tail_violations << "\n"
      << "  ledger mismatches:   " << ledger_mismatches << "\n"
      << "  orphaned records:    " << orphaned_records << "\n"
      << "  consistent:          " << (consistent() ? "yes" : "NO") << "\n";
  return out.str();
}

Status FsckStore(ZoneSetManager* mgr, const OperationalIndex& index,
                 const FsckOptions& options, FsckReport* report) {
  *report = FsckReport();
  const uint32_t bs = mgr->config().block_size;
  const uint32_t width = mgr->config().width;

  struct SetRecords {
    std::map<uint64_t, DigestEntry> by_offset;
    uint64_t min_wp = 0;
    uint64_t max_wp = 0;
    uint64_t segment_content = 0;
  };
  std::map<uint32_t, SetRecords> sets;

  for (const ZoneSetInfo& info : mgr->SnapshotTable()) {
    if (info.state == ZoneSetState::kEmpty ||
        info.state == ZoneSetState::kIndex)
      continue;
    SetRecords sr;
    std::vector<DigestEntry> records;
    Status s = ScanSetForFsck(mgr, info, &records, &sr.min_wp, &sr.max_wp);
    if (!s.ok()) return s;
    if (sr.max_wp == 0 && records.empty()) continue;
    report->sets_scanned++;
    for (const DigestEntry& e : records) {
      if (e.record_type == RecordType::kSegment)
        sr.segment_content += ShapeSegment(e.segment_length, width, bs).total;
      sr.by_offset[e.offset] = e;
    }
    sets[info.zoneset_id] = std::move(sr);
  }

  // Every index entry must resolve to a matching on-disk record below the
  // write pointer.
  std::map<uint32_t, uint64_t> live_by_set;
  std::set<std::pair<uint32_t, uint64_t>> referenced;
  for (const auto& [key, value] : index.Dump()) {
    report->entries_checked++;
    auto sit = sets.find(value.zoneset_id);
    if (sit == sets.end()) {
      report->missing_records++;
      continue;
    }
    const SegmentShape shape = ShapeSegment(value.length, width, bs);
    if (value.offset + bs + shape.fragment_stored > sit->second.min_wp)
      report->tail_violations++;
    auto rit = sit->second.by_offset.find(value.offset);
    if (rit == sit->second.by_offset.end() ||
        rit->second.record_type != RecordType::kSegment ||
        !(rit->second.object_id == key.object_id) ||
        rit->second.version != key.version ||
        rit->second.segment_id != key.segment_id ||
        rit->second.complete != key.complete ||
        rit->second.segment_length != value.length ||
        rit->second.entry_timestamp != value.entry_timestamp) {
      report->missing_records++;
      continue;
    }
    referenced.insert({value.zoneset_id, value.offset});
    live_by_set[value.zoneset_id] += shape.total;

    if (options.verify_payloads) {
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
      Status s = mgr->ReadSegment(value.zoneset_id, value.offset, expected,
                                  &payload, &degraded);
      if (!s.ok() || degraded) report->checksum_failures++;
    }
  }

  for (const auto& [set_id, sr] : sets)
    for (const auto& [offset, entry] : sr.by_offset)
      if (entry.record_type == RecordType::kSegment &&
          !referenced.count({set_id, offset}))
        report->orphaned_records++;

  if (options.verify_ledger) {
    for (const auto& [set_id, sr] : sets) {
      const uint64_t live = live_by_set.count(set_id) ? live_by_set[set_id] : 0;
      const uint64_t dead =
          sr.segment_content > live ? sr.segment_content - live : 0;
      if (mgr->GetInfo(set_id).dead_bytes != dead) report->ledger_mismatches++;
    }
  }
  return Status::OK();
}

Status ComputeDeadBytesByScan(ZoneSetManager* mgr,
                              const OperationalIndex& index,
                              std::map<uint32_t, uint64_t>* out) {
  out->clear();
  const uint32_t bs = mgr->config().block_size;
  const uint32_t width = mgr->config().width;
  std::map<uint32_t, uint64_t> live_by_set;
  index.ForEach([&](const IndexKey& key, const IndexValue& value) {
    live_by_set[value.zoneset_id] +=
        ShapeSegment(value.length, width, bs).total;
  });
  for (const ZoneSetInfo& info : mgr->SnapshotTable()) {
    if (info.state == ZoneSetState::kEmpty ||
        info.state == ZoneSetState::kIndex)
      continue;
    std::vector<DigestEntry> records;
    uint64_t min_wp = 0, max_wp = 0;
    Status s = ScanSetForFsck(mgr, info, &records, &min_wp, &max_wp);
    if (!s.ok()) return s;
    uint64_t content = 0;
    for (const DigestEntry& e : records)
      if (e.record_type == RecordType::kSegment)
        content += ShapeSegment(e.segment_length, width, bs).total;
    const uint64_t live =
        live_by_set.count(info.zoneset_id) ? live_by_set[info.zoneset_id] : 0;
    const uint64_t dead = content > live ? content - live : 0;
    if (dead > 0 || content > 0) (*out)[info.zoneset_id] = dead;
  }
  return Status::OK();
}

}  // namespace zonestore
