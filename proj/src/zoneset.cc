// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/zoneset.h"

#include <algorithm>
#include <cstring>

#include "zonestore/crc32c.h"

namespace zonestore {

namespace {

bool LegalTransition(ZoneSetState from, ZoneSetState to) {
  switch (from) {
    case ZoneSetState::kEmpty:
      return to == ZoneSetState::kAvailable;
    case ZoneSetState::kAvailable:
      // AVAILABLE -> CLOSED happens when recovery finds data in a set that
      // was opened after the last superblock write.
      return to == ZoneSetState::kOpen || to == ZoneSetState::kIndex ||
             to == ZoneSetState::kClosed;
    case ZoneSetState::kOpen:
      return to == ZoneSetState::kClosed;
    case ZoneSetState::kClosed:
      return to == ZoneSetState::kIndexed || to == ZoneSetState::kEmpty;
    case ZoneSetState::kIndexed:
      return to == ZoneSetState::kEmpty;
    case ZoneSetState::kIndex:
      return to == ZoneSetState::kEmpty;
  }
  return false;
}

}  // namespace

ZoneSetManager::ZoneSetManager(DriveMap drives, const ZoneSetConfig& config,
                               StoreMetrics* metrics)
    : drives_(std::move(drives)), config_(config), metrics_(metrics) {
  codec_ = MakeRaid4Codec(config_.data_shards());
}

Status ZoneSetManager::InitTable() {
  std::lock_guard<std::mutex> lk(mu_);
  if (config_.width != drives_.size())
    return Status::InvalidArgument(
        "zone-set width must equal the drive count");
  if (config_.width < 2) return Status::InvalidArgument("width must be >= 2");
  uint32_t zone_count = 0;
  for (const auto& [id, drive] : drives_) {
    const DriveGeometry& g = drive->geometry();
    if (zone_count == 0) zone_count = g.zone_count;
    if (g.zone_count != zone_count)
      return Status::InvalidArgument("drives differ in zone count");
  }
  if (zone_count < config_.superblock_zones_per_drive + 1)
    return Status::InsufficientZones("not enough zones per drive");

  const uint32_t set_count = zone_count - config_.superblock_zones_per_drive;
  sets_.clear();
  sets_.reserve(set_count);
  for (uint32_t i = 0; i < set_count; i++) {
    ZoneSetInfo info;
    info.zoneset_id = i;
    info.state = ZoneSetState::kEmpty;
    for (const auto& [id, drive] : drives_)
      info.members.push_back(
          ZoneMember{id, i + config_.superblock_zones_per_drive});
    sets_.push_back(std::move(info));
  }
  set_locks_ = std::make_unique<std::shared_mutex[]>(set_count);
  return Status::OK();
}

void ZoneSetManager::AdoptTable(const std::vector<ZoneSetInfo>& sets) {
  std::lock_guard<std::mutex> lk(mu_);
  sets_ = sets;
  std::sort(sets_.begin(), sets_.end(),
            [](const ZoneSetInfo& a, const ZoneSetInfo& b) {
              return a.zoneset_id < b.zoneset_id;
            });
  set_locks_ = std::make_unique<std::shared_mutex[]>(sets_.size());
}

bool ZoneSetManager::SetUsable(const ZoneSetInfo& info) const {
  if (info.members.size() != config_.width) return false;
  for (const ZoneMember& m : info.members) {
    Drive* d = drive(m.drive_id);
    if (d == nullptr || d->failed()) return false;
  }
  return true;
}

uint32_t ZoneSetManager::FreeSetsLocked() const {
  uint32_t n = 0;
  for (const ZoneSetInfo& info : sets_)
    if ((info.state == ZoneSetState::kEmpty ||
         info.state == ZoneSetState::kAvailable) &&
        SetUsable(info))
      n++;
  return n;
}

uint32_t ZoneSetManager::FreeSets() const {
  std::lock_guard<std::mutex> lk(mu_);
  return FreeSetsLocked();
}

uint32_t ZoneSetManager::AvailableSets() const {
  std::lock_guard<std::mutex> lk(mu_);
  uint32_t n = 0;
  for (const ZoneSetInfo& info : sets_)
    if (info.state == ZoneSetState::kAvailable && SetUsable(info)) n++;
  return n;
}

Status ZoneSetManager::ReplenishLocked(uint32_t target,
                                       std::vector<uint32_t>* newly) {
  // Called with alloc_mu_ held, mu_ not held.
  std::vector<uint32_t> candidates;
  {
    std::lock_guard<std::mutex> lk(mu_);
    uint32_t available = 0;
    for (const ZoneSetInfo& info : sets_)
      if (info.state == ZoneSetState::kAvailable && SetUsable(info))
        available++;
    for (const ZoneSetInfo& info : sets_) {
      if (available + candidates.size() >= target) break;
      if (info.state == ZoneSetState::kEmpty && SetUsable(info))
        candidates.push_back(info.zoneset_id);
    }
    if (available == 0 && candidates.empty())
      return Status::OutOfSpace("no empty zone sets to replenish from");
    for (uint32_t id : candidates) sets_[id].state = ZoneSetState::kAvailable;
  }
  if (!candidates.empty() && sb_writer_) {
    // The transition is only durable once the superblock records it; until
    // then alloc_mu_ keeps these sets from being opened.
    Status s = sb_writer_();
    if (!s.ok()) {
      std::lock_guard<std::mutex> lk(mu_);
      for (uint32_t id : candidates) sets_[id].state = ZoneSetState::kEmpty;
      return s;
    }
  }
  if (newly) *newly = std::move(candidates);
  return Status::OK();
}

Status ZoneSetManager::ReplenishAvailable(uint32_t target,
                                          std::vector<uint32_t>* newly) {
  std::lock_guard<std::mutex> alloc_lk(alloc_mu_);
  return ReplenishLocked(target, newly);
}

Status ZoneSetManager::OpenZoneSet(OpenPurpose purpose,
                                   std::unique_ptr<ZoneSetWriter>* out) {
  std::lock_guard<std::mutex> alloc_lk(alloc_mu_);
  for (int attempt = 0; attempt < 2; attempt++) {
    {
      std::lock_guard<std::mutex> lk(mu_);
      if (purpose != OpenPurpose::kGarbageCollection &&
          FreeSetsLocked() <= config_.gc_reserve_sets)
        return Status::OutOfSpace("free zone sets at the cleaning reserve");
      for (ZoneSetInfo& info : sets_) {
        if (info.state != ZoneSetState::kAvailable || !SetUsable(info))
          continue;
        const ZoneSetState next = purpose == OpenPurpose::kIndexSnapshot
                                      ? ZoneSetState::kIndex
                                      : ZoneSetState::kOpen;
        info.state = next;
        info.write_offset = 0;
        auto writer = std::unique_ptr<ZoneSetWriter>(
            new ZoneSetWriter(this, info.zoneset_id, info.members,
                              next == ZoneSetState::kIndex
                                  ? ZoneSetState::kIndex
                                  : ZoneSetState::kClosed));
        active_writers_[info.zoneset_id] = writer.get();
        *out = std::move(writer);
        return Status::OK();
      }
    }
    Status s = ReplenishLocked(config_.available_target, nullptr);
    if (!s.ok()) return s;
  }
  return Status::OutOfSpace("no available zone sets");
}

Status ZoneSetManager::SetState(uint32_t zoneset_id, ZoneSetState next) {
  std::lock_guard<std::mutex> lk(mu_);
  if (zoneset_id >= sets_.size())
    return Status::InvalidArgument("zone set id out of range");
  ZoneSetInfo& info = sets_[zoneset_id];
  if (!LegalTransition(info.state, next))
    return Status::BadState(std::string("transition ") +
                            ZoneSetStateName(info.state) + " -> " +
                            ZoneSetStateName(next));
  info.state = next;
  return Status::OK();
}

Status ZoneSetManager::TrimZoneSet(uint32_t zoneset_id) {
  std::unique_lock<std::shared_mutex> set_lk(SetLock(zoneset_id));
  std::lock_guard<std::mutex> lk(mu_);
  if (zoneset_id >= sets_.size())
    return Status::InvalidArgument("zone set id out of range");
  ZoneSetInfo& info = sets_[zoneset_id];
  if (info.state != ZoneSetState::kClosed &&
      info.state != ZoneSetState::kIndexed &&
      info.state != ZoneSetState::kIndex)
    return Status::BadState(std::string("trim of ") +
                            ZoneSetStateName(info.state) + " zone set");
  for (const ZoneMember& m : info.members) {
    Drive* d = drive(m.drive_id);
    if (d == nullptr || d->failed()) continue;  // rebuilt later
    Status s = d->ResetZone(m.zone_id);
    if (!s.ok()) return s;
  }
  info.state = ZoneSetState::kEmpty;
  info.write_offset = 0;
  info.dead_bytes = 0;
  info.dead_bytes_snapshot = 0;
  return Status::OK();
}

Status ZoneSetManager::ReplaceZone(uint32_t zoneset_id, uint32_t failed_drive,
                                   ZoneMember donor) {
  std::lock_guard<std::mutex> lk(mu_);
  if (zoneset_id >= sets_.size())
    return Status::InvalidArgument("zone set id out of range");
  ZoneSetInfo& info = sets_[zoneset_id];
  size_t victim_idx = info.members.size();
  for (size_t i = 0; i < info.members.size(); i++) {
    if (info.members[i].drive_id == failed_drive) victim_idx = i;
    if (info.members[i].drive_id == donor.drive_id)
      return Status::DonorConflict("drive " + std::to_string(donor.drive_id) +
                                   " already holds a zone of this set");
  }
  if (victim_idx == info.members.size())
    return Status::InvalidArgument("failed drive not a member");
  Drive* donor_drive = drive(donor.drive_id);
  if (donor_drive == nullptr || donor_drive->failed())
    return Status::DonorExhausted("donor drive unusable");
  if (donor.zone_id >= donor_drive->geometry().zone_count)
    return Status::InvalidArgument("donor zone out of range");
  if (donor_drive->WritePointer(donor.zone_id) != 0)
    return Status::DonorNotEmpty("donor zone has data");
  // If another set owns the donor zone it must be empty; hand it the dead
  // zone so every (drive, zone) pair stays owned by exactly one set.
  for (ZoneSetInfo& other : sets_) {
    if (other.zoneset_id == zoneset_id) continue;
    for (ZoneMember& m : other.members) {
      if (m.drive_id == donor.drive_id && m.zone_id == donor.zone_id) {
        if (other.state != ZoneSetState::kEmpty)
          return Status::DonorNotEmpty("donor zone belongs to set " +
                                       std::to_string(other.zoneset_id));
        m = info.members[victim_idx];
      }
    }
  }
  info.members[victim_idx] = donor;
  return Status::OK();
}

ZoneSetInfo ZoneSetManager::GetInfo(uint32_t zoneset_id) const {
  std::lock_guard<std::mutex> lk(mu_);
  return sets_.at(zoneset_id);
}

std::vector<ZoneSetInfo> ZoneSetManager::SnapshotTable() const {
  std::lock_guard<std::mutex> lk(mu_);
  return sets_;
}

void ZoneSetManager::AddDeadBytes(uint32_t zoneset_id, uint64_t bytes) {
  std::lock_guard<std::mutex> lk(mu_);
  if (zoneset_id >= sets_.size()) return;
  sets_[zoneset_id].dead_bytes += bytes;
}

std::map<uint32_t, uint64_t> ZoneSetManager::DeadBytesBySet() const {
  std::lock_guard<std::mutex> lk(mu_);
  std::map<uint32_t, uint64_t> out;
  for (const ZoneSetInfo& info : sets_)
    if (info.dead_bytes > 0) out[info.zoneset_id] = info.dead_bytes;
  return out;
}

void ZoneSetManager::FreezeDeadBytes() {
  std::lock_guard<std::mutex> lk(mu_);
  for (ZoneSetInfo& info : sets_) info.dead_bytes_snapshot = info.dead_bytes;
}

void ZoneSetManager::MarkIndexed(const std::vector<uint32_t>& ids) {
  std::lock_guard<std::mutex> lk(mu_);
  for (uint32_t id : ids)
    if (id < sets_.size() && sets_[id].state == ZoneSetState::kClosed)
      sets_[id].state = ZoneSetState::kIndexed;
}

void ZoneSetManager::ReplaceDrives(DriveMap drives) {
  std::lock_guard<std::mutex> lk(mu_);
  drives_ = std::move(drives);
}

uint64_t ZoneSetManager::TotalDeviceBytesAppended() const {
  uint64_t total = 0;
  for (const auto& [id, drive] : drives_) total += drive->bytes_appended();
  return total;
}

Status ZoneSetManager::FlushActiveWriters() {
  std::lock_guard<std::mutex> lk(mu_);
  for (auto& [id, writer] : active_writers_) {
    Status s = writer->Flush();
    if (!s.ok()) return s;
  }
  return Status::OK();
}

Status ZoneSetManager::EnsureDurable(uint32_t zoneset_id,
                                     uint64_t end_offset) {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = active_writers_.find(zoneset_id);
  if (it == active_writers_.end()) return Status::OK();
  if (it->second->durable_offset() >= end_offset) return Status::OK();
  return it->second->Flush();
}

Status ZoneSetManager::ReadZoneRange(const ZoneMember& m, uint64_t offset,
                                     std::span<uint8_t> out) const {
  Drive* d = drive(m.drive_id);
  if (d == nullptr) return Status::DriveFailed("unknown drive");
  return d->Read(m.zone_id, offset, out);
}

Status ZoneSetManager::ReadSegment(uint32_t zoneset_id, uint64_t offset,
                                   const LayoutMarkerBlock& expected,
                                   std::vector<uint8_t>* payload,
                                   bool* degraded) {
  if (degraded) *degraded = false;
  const uint32_t bs = config_.block_size;
  const uint32_t k = config_.data_shards();
  const SegmentShape shape = ShapeSegment(expected.segment_length,
                                          config_.width, bs);
  std::vector<ZoneMember> members;
  {
    std::lock_guard<std::mutex> lk(mu_);
    if (zoneset_id >= sets_.size())
      return Status::InvalidArgument("zone set id out of range");
    members = sets_[zoneset_id].members;
  }
  if (members.size() != config_.width)
    return Status::ReadError("zone set is missing members");
  Status s = EnsureDurable(zoneset_id, offset + shape.per_zone);
  if (!s.ok() && !s.IsDriveFailed()) return s;

  const uint64_t record_bytes = bs + shape.fragment_stored;
  ShardSet shards(config_.width);
  std::vector<uint32_t> want_crc(config_.width, 0);
  std::vector<bool> have_crc(config_.width, false);
  uint32_t bad = 0;

  auto fetch = [&](uint32_t zone_index) {
    std::vector<uint8_t> buf(record_bytes);
    Status rs = ReadZoneRange(members[zone_index], offset, buf);
    if (!rs.ok()) return;
    LayoutMarkerBlock lmb;
    rs = DecodeLmb(std::span<const uint8_t>(buf.data(), bs), &lmb);
    if (!rs.ok()) return;
    if (lmb.record_type != RecordType::kSegment ||
        lmb.object_id != expected.object_id ||
        lmb.version != expected.version ||
        lmb.segment_id != expected.segment_id ||
        lmb.complete != expected.complete ||
        lmb.segment_length != expected.segment_length ||
        lmb.fragment_length != shape.fragment_stored ||
        lmb.entry_timestamp != expected.entry_timestamp)
      return;
    want_crc[zone_index] = lmb.payload_checksum;
    have_crc[zone_index] = true;
    std::vector<uint8_t> frag(buf.begin() + bs, buf.end());
    if (crc32c::Value(frag.data(), frag.size()) != lmb.payload_checksum)
      return;
    shards[zone_index] = std::move(frag);
  };

  for (uint32_t j = 0; j < k; j++) {
    fetch(j);
    if (!shards[j].has_value()) bad++;
  }
  if (bad > 0) {
    if (degraded) *degraded = true;
    if (metrics_) metrics_->degraded_reads.fetch_add(1);
    fetch(k);  // parity shard
    uint32_t missing = 0;
    for (uint32_t j = 0; j < config_.width; j++)
      if (!shards[j].has_value()) missing++;
    if (missing > 1)
      return Status::ReadError("segment unrecoverable: " +
                               std::to_string(missing) + " bad fragments");
    s = codec_->Reconstruct(&shards);
    if (!s.ok()) return Status::ReadError(s.ToString());
    for (uint32_t j = 0; j < k; j++) {
      if (have_crc[j] &&
          crc32c::Value(shards[j]->data(), shards[j]->size()) != want_crc[j])
        return Status::ReadError("reconstructed fragment checksum mismatch");
    }
  }

  payload->clear();
  payload->reserve(shape.fragment_payload * k);
  for (uint32_t j = 0; j < k; j++) {
    const uint64_t take =
        std::min<uint64_t>(shape.fragment_payload, shards[j]->size());
    payload->insert(payload->end(), shards[j]->begin(),
                    shards[j]->begin() + static_cast<ptrdiff_t>(take));
  }
  payload->resize(expected.segment_length);
  if (metrics_) metrics_->read_bytes.fetch_add(expected.segment_length);
  return Status::OK();
}

Status ZoneSetManager::ReadDigest(uint32_t zoneset_id, ZoneSetDigest* out) {
  const uint32_t bs = config_.block_size;
  std::vector<ZoneMember> members;
  uint32_t rr;
  {
    std::lock_guard<std::mutex> lk(mu_);
    if (zoneset_id >= sets_.size())
      return Status::InvalidArgument("zone set id out of range");
    members = sets_[zoneset_id].members;
    rr = digest_read_rr_++;
  }
  Status last = Status::ReadError("no healthy replica");
  for (uint32_t i = 0; i < members.size(); i++) {
    const ZoneMember& m = members[(rr + i) % members.size()];
    Drive* d = drive(m.drive_id);
    if (d == nullptr || d->failed()) continue;
    const uint64_t wp = d->WritePointer(m.zone_id);
    if (wp < bs) {
      last = Status::ReadError("zone too short for a digest");
      continue;
    }
    std::vector<uint8_t> tail(bs);
    Status s = d->Read(m.zone_id, wp - bs, tail);
    if (!s.ok()) {
      last = s;
      continue;
    }
    uint32_t blocks = 0;
    s = DigestBlocksFromTailBlock(tail, &blocks);
    if (!s.ok()) {
      last = s;
      continue;
    }
    const uint64_t digest_bytes = static_cast<uint64_t>(blocks) * bs;
    if (digest_bytes > wp) {
      last = Status::Corruption("digest larger than zone content");
      continue;
    }
    std::vector<uint8_t> buf(digest_bytes);
    s = d->Read(m.zone_id, wp - digest_bytes, buf);
    if (!s.ok()) {
      last = s;
      continue;
    }
    s = DecodeDigest(buf, out);
    if (s.ok()) return s;
    last = s;
  }
  return last;
}

Status ZoneSetManager::WalkRecords(uint32_t zoneset_id,
                                   std::vector<DigestEntry>* out,
                                   uint32_t* truncated_tail) const {
  out->clear();
  if (truncated_tail) *truncated_tail = 0;
  const uint32_t bs = config_.block_size;
  std::vector<ZoneMember> members;
  {
    std::lock_guard<std::mutex> lk(mu_);
    if (zoneset_id >= sets_.size())
      return Status::InvalidArgument("zone set id out of range");
    members = sets_[zoneset_id].members;
  }
  Drive* walk_drive = nullptr;
  const ZoneMember* walk_member = nullptr;
  uint64_t min_wp = UINT64_MAX;
  for (const ZoneMember& m : members) {
    Drive* d = drive(m.drive_id);
    if (d == nullptr || d->failed()) continue;
    min_wp = std::min(min_wp, d->WritePointer(m.zone_id));
    if (walk_drive == nullptr) {
      walk_drive = d;
      walk_member = &m;
    }
  }
  if (walk_drive == nullptr) return Status::ReadError("no healthy member");
  if (min_wp == UINT64_MAX || min_wp == 0) return Status::OK();

  uint64_t off = 0;
  std::vector<uint8_t> block(bs);
  while (off + bs <= min_wp) {
    Status s = walk_drive->Read(walk_member->zone_id, off, block);
    if (!s.ok()) return s;
    if (LooksLikeDigestStart(block)) break;  // closed set: records end here
    LayoutMarkerBlock lmb;
    s = DecodeLmb(block, &lmb);
    if (!s.ok()) {
      // First invalid record ends the walk; anything beyond is a torn tail.
      if (truncated_tail) (*truncated_tail)++;
      break;
    }
    const uint64_t end = off + bs + lmb.fragment_length;
    if (end > min_wp) {
      if (truncated_tail) (*truncated_tail)++;
      break;
    }
    DigestEntry e;
    e.record_type = lmb.record_type;
    e.complete = lmb.complete;
    e.object_id = lmb.object_id;
    e.version = lmb.version;
    e.segment_id = lmb.segment_id;
    e.segment_length = lmb.segment_length;
    e.fragment_length = lmb.fragment_length;
    e.entry_timestamp = lmb.entry_timestamp;
    e.offset = off;
    out->push_back(e);
    off = end;
  }
  return Status::OK();
}

void ZoneSetManager::WriterClosed(uint32_t zoneset_id,
                                  ZoneSetState final_state,
                                  uint64_t write_offset) {
  std::lock_guard<std::mutex> lk(mu_);
  active_writers_.erase(zoneset_id);
  if (zoneset_id >= sets_.size()) return;
  ZoneSetInfo& info = sets_[zoneset_id];
  info.write_offset = write_offset;
  if (info.state == ZoneSetState::kOpen && final_state == ZoneSetState::kClosed)
    info.state = ZoneSetState::kClosed;
  // INDEX sets keep their state after closing.
}

void ZoneSetManager::WriterAbandoned(uint32_t zoneset_id) {
  std::lock_guard<std::mutex> lk(mu_);
  active_writers_.erase(zoneset_id);
}

// --- ZoneSetWriter ---

ZoneSetWriter::ZoneSetWriter(ZoneSetManager* mgr, uint32_t zoneset_id,
                             std::vector<ZoneMember> members,
                             ZoneSetState final_state)
    : mgr_(mgr),
      info_id_(zoneset_id),
      members_(std::move(members)),
      final_state_(final_state),
      fifos_(members_.size()) {}

ZoneSetWriter::~ZoneSetWriter() {
  if (!closed_ && mgr_) mgr_->WriterAbandoned(info_id_);
}

uint64_t ZoneSetWriter::write_offset() const {
  std::lock_guard<std::mutex> lk(mu_);
  return write_offset_;
}

uint64_t ZoneSetWriter::durable_offset() const {
  std::lock_guard<std::mutex> lk(mu_);
  return durable_offset_;
}

size_t ZoneSetWriter::pending_entries() const {
  std::lock_guard<std::mutex> lk(mu_);
  return pending_digest_.size();
}

uint64_t ZoneSetWriter::MaxSegmentPayloadLocked() const {
  const uint32_t bs = mgr_->config_.block_size;
  const uint64_t reserve =
      static_cast<uint64_t>(DigestBlocks(pending_digest_.size() + 1, bs)) * bs;
  const uint64_t cap = mgr_->config_.zone_capacity;
  if (write_offset_ + reserve + bs > cap) return 0;
  const uint64_t budget = cap - write_offset_ - reserve - bs;
  return AlignDown(budget, bs) * mgr_->config_.data_shards();
}

uint64_t ZoneSetWriter::MaxSegmentPayload() const {
  std::lock_guard<std::mutex> lk(mu_);
  return MaxSegmentPayloadLocked();
}

Status ZoneSetWriter::FlushZoneLocked(uint32_t zone_index) {
  std::vector<uint8_t>& buf = fifos_[zone_index];
  if (buf.empty()) return Status::OK();
  const ZoneMember& m = members_[zone_index];
  Drive* d = mgr_->drive(m.drive_id);
  if (d == nullptr || d->failed()) {
    // Degraded mode: the failed member's fragments are reconstructible
    // from the survivors, so the stripe proceeds without it.
    buf.clear();
    return Status::OK();
  }
  uint64_t off = 0;
  Status s = d->Append(m.zone_id, buf, &off);
  if (!s.ok()) return s;
  if (mgr_->metrics_ && zone_index + 1 == members_.size())
    mgr_->metrics_->parity_bytes.fetch_add(buf.size());
  buf.clear();
  return Status::OK();
}

Status ZoneSetWriter::Flush() {
  std::lock_guard<std::mutex> lk(mu_);
  for (uint32_t i = 0; i < members_.size(); i++) {
    Status s = FlushZoneLocked(i);
    if (!s.ok()) return s;
  }
  durable_offset_ = write_offset_;
  return Status::OK();
}

Status ZoneSetWriter::AppendRecordLocked(
    const LayoutMarkerBlock& base,
    std::span<const std::vector<uint8_t>> fragments, AppendResult* out) {
  const uint32_t bs = mgr_->config_.block_size;
  const uint64_t frag_stored = fragments.empty() ? 0 : fragments[0].size();
  const uint64_t need = bs + frag_stored;
  const uint64_t reserve =
      static_cast<uint64_t>(DigestBlocks(pending_digest_.size() + 1, bs)) * bs;
  if (write_offset_ + need + reserve > mgr_->config_.zone_capacity)
    return Status::SegmentTooLarge(
        "record needs " + std::to_string(need) + " bytes per zone, " +
        std::to_string(mgr_->config_.zone_capacity - write_offset_) +
        " remain before the digest reservation");

  const uint64_t record_offset = write_offset_;
  for (uint32_t i = 0; i < members_.size(); i++) {
    LayoutMarkerBlock lmb = base;
    lmb.fragment_length = frag_stored;
    lmb.payload_checksum =
        fragments.empty()
            ? 0
            : crc32c::Value(fragments[i].data(), fragments[i].size());
    std::vector<uint8_t> block;
    Status s = EncodeLmb(lmb, bs, &block);
    if (!s.ok()) return s;
    std::vector<uint8_t>& fifo = fifos_[i];
    fifo.insert(fifo.end(), block.begin(), block.end());
    if (!fragments.empty())
      fifo.insert(fifo.end(), fragments[i].begin(), fragments[i].end());
    if (fifo.size() >= mgr_->config_.fifo_bytes) {
      s = FlushZoneLocked(i);
      if (!s.ok()) return s;
    }
  }
  write_offset_ += need;
  // durable_offset_ trails by the greatest buffered amount; recompute from
  // the fullest FIFO (all FIFOs carry identical byte counts).
  durable_offset_ = write_offset_ - fifos_[0].size();

  DigestEntry e;
  e.record_type = base.record_type;
  e.complete = base.complete;
  e.object_id = base.object_id;
  e.version = base.version;
  e.segment_id = base.segment_id;
  e.segment_length = base.segment_length;
  e.fragment_length = frag_stored;
  e.entry_timestamp = base.entry_timestamp;
  e.offset = record_offset;
  pending_digest_.push_back(e);

  if (out) {
    out->zoneset_id = info_id_;
    out->offset = record_offset;
    out->per_zone_bytes = need;
  }
  return Status::OK();
}

Status ZoneSetWriter::AppendSegment(const SegmentMeta& meta,
                                    std::span<const uint8_t> payload,
                                    AppendResult* out) {
  std::lock_guard<std::mutex> lk(mu_);
  if (closed_) return Status::BadState("writer is closed");
  const uint32_t bs = mgr_->config_.block_size;
  const uint32_t k = mgr_->config_.data_shards();
  const SegmentShape shape =
      ShapeSegment(payload.size(), mgr_->config_.width, bs);

  std::vector<std::vector<uint8_t>> fragments;
  if (shape.fragment_stored > 0) {
    fragments.resize(mgr_->config_.width);
    std::vector<std::span<const uint8_t>> data_views(k);
    for (uint32_t j = 0; j < k; j++) {
      std::vector<uint8_t>& frag = fragments[j];
      frag.assign(shape.fragment_stored, 0);
      const uint64_t begin = std::min<uint64_t>(
          static_cast<uint64_t>(j) * shape.fragment_payload, payload.size());
      const uint64_t end = std::min<uint64_t>(
          begin + shape.fragment_payload, payload.size());
      if (end > begin) memcpy(frag.data(), payload.data() + begin, end - begin);
      data_views[j] = std::span<const uint8_t>(frag.data(), frag.size());
    }
    std::vector<std::vector<uint8_t>> parity;
    Status s = mgr_->codec_->Encode(
        std::span<const std::span<const uint8_t>>(data_views), &parity);
    if (!s.ok()) return s;
    fragments[k] = std::move(parity[0]);
  }

  LayoutMarkerBlock base;
  base.record_type = RecordType::kSegment;
  base.object_id = meta.object_id;
  base.version = meta.version;
  base.segment_id = meta.segment_id;
  base.complete = meta.complete;
  base.segment_length = payload.size();
  base.entry_timestamp = meta.entry_timestamp;

  Status s = AppendRecordLocked(base, fragments, out);
  if (!s.ok()) return s;
  if (mgr_->config_.durable_acks) {
    for (uint32_t i = 0; i < members_.size(); i++) {
      s = FlushZoneLocked(i);
      if (!s.ok()) return s;
    }
    durable_offset_ = write_offset_;
  }
  return Status::OK();
}

Status ZoneSetWriter::AppendTombstone(const ObjectId& object_id,
                                      Timestamp version,
                                      Timestamp entry_timestamp,
                                      AppendResult* out) {
  std::lock_guard<std::mutex> lk(mu_);
  if (closed_) return Status::BadState("writer is closed");
  LayoutMarkerBlock base;
  base.record_type = RecordType::kTombstone;
  base.object_id = object_id;
  base.version = version;
  base.segment_id = 0;
  base.complete = false;
  base.segment_length = 0;
  base.entry_timestamp = entry_timestamp;
  Status s = AppendRecordLocked(base, {}, out);
  if (!s.ok()) return s;
  if (mgr_->config_.durable_acks) {
    for (uint32_t i = 0; i < members_.size(); i++) {
      s = FlushZoneLocked(i);
      if (!s.ok()) return s;
    }
    durable_offset_ = write_offset_;
  }
  return Status::OK();
}

Status ZoneSetWriter::Close() {
  uint64_t final_offset;
  {
    std::lock_guard<std::mutex> lk(mu_);
    if (closed_) return Status::BadState("writer already closed");
    ZoneSetDigest digest{pending_digest_};
    std::vector<uint8_t> encoded;
    Status s = EncodeDigest(digest, mgr_->config_.block_size, &encoded);
    if (!s.ok()) return s;
    for (uint32_t i = 0; i < members_.size(); i++) {
      fifos_[i].insert(fifos_[i].end(), encoded.begin(), encoded.end());
      s = FlushZoneLocked(i);
      if (!s.ok()) return s;
    }
    write_offset_ += encoded.size();
    durable_offset_ = write_offset_;
    closed_ = true;
    final_offset = write_offset_;
  }
  mgr_->WriterClosed(info_id_, final_state_, final_offset);
  return Status::OK();
}

}  // namespace zonestore
