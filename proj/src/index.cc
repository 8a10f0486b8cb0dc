// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/index.h"

#include <algorithm>
#include <mutex>

#include "coding.h"
#include "zonestore/crc32c.h"

namespace zonestore {

namespace {

constexpr char kIndexMagic[4] = {'Z', 'I', 'D', 'X'};
constexpr uint16_t kIndexFormatVersion = 1;
constexpr size_t kIndexHeaderBytes = 4 + 2 + 2 + 8 + 8 + 8;
constexpr size_t kIndexRecordBytes = 80;

IndexKey LowerBoundKey(const ObjectId& id) {
  IndexKey k;
  k.object_id = id;
  k.version = 0;
  k.segment_id = 0;
  k.complete = false;
  return k;
}

}  // namespace

void OperationalIndex::Insert(const IndexKey& key, const IndexValue& value) {
  std::unique_lock lk(mu_);
  map_[key] = value;
}

bool OperationalIndex::Remove(const IndexKey& key) {
  std::unique_lock lk(mu_);
  return map_.erase(key) > 0;
}

bool OperationalIndex::Get(const IndexKey& key, IndexValue* value) const {
  std::shared_lock lk(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) return false;
  if (value) *value = it->second;
  return true;
}

bool OperationalIndex::UpdateIfEqual(const IndexKey& key,
                                     const IndexValue& expected,
                                     const IndexValue& next) {
  std::unique_lock lk(mu_);
  auto it = map_.find(key);
  if (it == map_.end() || !(it->second == expected)) return false;
  it->second = next;
  return true;
}

std::vector<IndexEntry> OperationalIndex::LookupObject(
    const ObjectId& id) const {
  std::shared_lock lk(mu_);
  std::vector<IndexEntry> out;
  for (auto it = map_.lower_bound(LowerBoundKey(id));
       it != map_.end() && it->first.object_id == id; ++it)
    out.push_back(*it);
  return out;
}

std::optional<Timestamp> OperationalIndex::LatestCompleteIn(
    const std::vector<IndexEntry>& entries, bool require_chain) {
  std::optional<Timestamp> best;
  for (const auto& [key, value] : entries) {
    if (!key.complete) continue;
    if (best && *best >= key.version) continue;
    if (require_chain) {
      // The complete entry carries the last segment id; every earlier
      // segment of the version must be present.
      bool whole = true;
      for (uint32_t seg = 0; seg < key.segment_id && whole; seg++) {
        whole = std::any_of(entries.begin(), entries.end(),
                            [&](const IndexEntry& e) {
                              return e.first.version == key.version &&
                                     e.first.segment_id == seg &&
                                     !e.first.complete;
                            });
      }
      if (!whole) continue;
    }
    best = key.version;
  }
  return best;
}

std::optional<Timestamp> OperationalIndex::LatestCompleteVersion(
    const ObjectId& id) const {
  return LatestCompleteIn(LookupObject(id), /*require_chain=*/false);
}

std::optional<Timestamp> OperationalIndex::LatestCompleteChainedVersion(
    const ObjectId& id) const {
  return LatestCompleteIn(LookupObject(id), /*require_chain=*/true);
}

std::vector<IndexEntry> OperationalIndex::RemoveVersionsBelow(
    const ObjectId& id, Timestamp bound) {
  std::unique_lock lk(mu_);
  std::vector<IndexEntry> removed;
  auto it = map_.lower_bound(LowerBoundKey(id));
  while (it != map_.end() && it->first.object_id == id) {
    if (it->first.version < bound) {
      removed.push_back(*it);
      it = map_.erase(it);
    } else {
      ++it;
    }
  }
  return removed;
}

std::vector<IndexEntry> OperationalIndex::RemoveVersionsUpTo(
    const ObjectId& id, Timestamp bound) {
  std::unique_lock lk(mu_);
  std::vector<IndexEntry> removed;
  auto it = map_.lower_bound(LowerBoundKey(id));
  while (it != map_.end() && it->first.object_id == id) {
    if (it->first.version <= bound) {
      removed.push_back(*it);
      it = map_.erase(it);
    } else {
      ++it;
    }
  }
  return removed;
}

size_t OperationalIndex::size() const {
  std::shared_lock lk(mu_);
  return map_.size();
}

void OperationalIndex::Clear() {
  std::unique_lock lk(mu_);
  map_.clear();
}

std::vector<IndexEntry> OperationalIndex::Dump() const {
  std::shared_lock lk(mu_);
  return {map_.begin(), map_.end()};
}

void OperationalIndex::ForEach(
    const std::function<void(const IndexKey&, const IndexValue&)>& fn) const {
  std::shared_lock lk(mu_);
  for (const auto& [key, value] : map_) fn(key, value);
}

std::vector<ObjectId> OperationalIndex::ObjectIds() const {
  std::shared_lock lk(mu_);
  std::vector<ObjectId> ids;
  const ObjectId* last = nullptr;
  for (const auto& [key, value] : map_) {
    if (last == nullptr || !(*last == key.object_id)) {
      ids.push_back(key.object_id);
      last = &key.object_id;
    }
  }
  return ids;
}

Timestamp OperationalIndex::MaxTimestamp() const {
  std::shared_lock lk(mu_);
  Timestamp max = 0;
  for (const auto& [key, value] : map_) {
    max = std::max(max, key.version);
    max = std::max(max, value.entry_timestamp);
  }
  return max;
}

Status SerializeIndex(const OperationalIndex& index, uint64_t snapshot_id,
                      Timestamp created_at, std::vector<uint8_t>* out) {
  out->clear();
  PutBytes(out, kIndexMagic, 4);
  PutU16(out, kIndexFormatVersion);
  PutU16(out, 0);
  PutU64(out, snapshot_id);
  PutU64(out, created_at);
  PutU64(out, 0);  // entry count, patched below
  uint64_t count = 0;
  index.ForEach([&](const IndexKey& key, const IndexValue& value) {
    PutBytes(out, key.object_id.bytes.data(), 32);
    PutU64(out, key.version);
    PutU32(out, key.segment_id);
    PutU32(out, key.complete ? 1 : 0);
    PutU32(out, value.zoneset_id);
    PutU32(out, 0);
    PutU64(out, value.offset);
    PutU64(out, value.length);
    PutU64(out, value.entry_timestamp);
    count++;
  });
  for (int i = 0; i < 8; i++)
    (*out)[kIndexHeaderBytes - 8 + i] = static_cast<uint8_t>(count >> (8 * i));
  PutU32(out, crc32c::Value(out->data(), out->size()));
  return Status::OK();
}

Status DeserializeIndex(std::span<const uint8_t> image, OperationalIndex* out,
                        uint64_t* snapshot_id, Timestamp* created_at) {
  if (image.size() < kIndexHeaderBytes + 4)
    return Status::SnapshotIncomplete("index image too short");
  if (memcmp(image.data(), kIndexMagic, 4) != 0)
    return Status::SnapshotCorrupt("bad index image magic");
  Reader r(image);
  r.Skip(4);
  if (r.U16() != kIndexFormatVersion)
    return Status::SnapshotCorrupt("unknown index image version");
  r.U16();
  const uint64_t id = r.U64();
  const Timestamp created = r.U64();
  const uint64_t count = r.U64();
  const uint64_t expect = kIndexHeaderBytes + count * kIndexRecordBytes + 4;
  if (image.size() < expect)
    return Status::SnapshotIncomplete("index image truncated");
  if (image.size() != expect)
    return Status::SnapshotCorrupt("index image size mismatch");
  const uint32_t stored = crc32c::Value(image.data(), image.size() - 4);
  uint32_t trailer = 0;
  for (int i = 0; i < 4; i++)
    trailer |= static_cast<uint32_t>(image[image.size() - 4 + i]) << (8 * i);
  if (stored != trailer) return Status::SnapshotCorrupt("index image checksum");
  out->Clear();
  for (uint64_t i = 0; i < count; i++) {
    IndexKey key;
    IndexValue value;
    r.Bytes(key.object_id.bytes.data(), 32);
    key.version = r.U64();
    key.segment_id = r.U32();
    key.complete = r.U32() != 0;
    value.zoneset_id = r.U32();
    r.U32();
    value.offset = r.U64();
    value.length = r.U64();
    value.entry_timestamp = r.U64();
    out->Insert(key, value);
  }
  if (snapshot_id) *snapshot_id = id;
  if (created_at) *created_at = created;
  return Status::OK();
}

}  // namespace zonestore
