// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/layout.h"

#include <cstring>

#include "coding.h"
#include "zonestore/crc32c.h"

namespace zonestore {

namespace {

constexpr char kLmbMagic[4] = {'Z', 'L', 'M', 'B'};
constexpr char kDigestMagic[4] = {'Z', 'D', 'I', 'G'};
constexpr char kDigestTrailerMagic[4] = {'Z', 'D', 'G', 'T'};
constexpr char kSuperblockMagic[4] = {'Z', 'S', 'U', 'P'};

constexpr uint16_t kFormatVersion = 1;

constexpr size_t kLmbHeaderBytes = 88;  // including both checksums
constexpr size_t kDigestHeaderBytes = 12;
constexpr size_t kDigestEntryBytes = 80;
constexpr size_t kDigestTrailerBytes = 16;

constexpr uint32_t kFlagComplete = 1u << 0;
constexpr uint16_t kSbFlagCleanShutdown = 1u << 0;
constexpr uint32_t kManifestFlagComplete = 1u << 0;

bool CheckMagic(std::span<const uint8_t> buf, const char magic[4]) {
  return buf.size() >= 4 && memcmp(buf.data(), magic, 4) == 0;
}

}  // namespace

const char* ZoneSetStateName(ZoneSetState s) {
  switch (s) {
    case ZoneSetState::kEmpty:
      return "EMPTY";
    case ZoneSetState::kAvailable:
      return "AVAILABLE";
    case ZoneSetState::kOpen:
      return "OPEN";
    case ZoneSetState::kClosed:
      return "CLOSED";
    case ZoneSetState::kIndexed:
      return "INDEXED";
    case ZoneSetState::kIndex:
      return "INDEX";
  }
  return "?";
}

Status EncodeLmb(const LayoutMarkerBlock& lmb, uint32_t block_size,
                 std::vector<uint8_t>* out) {
  if (block_size < kLmbHeaderBytes)
    return Status::InvalidArgument("block size too small for marker block");
  if (lmb.record_type == RecordType::kTombstone &&
      (lmb.segment_length != 0 || lmb.fragment_length != 0))
    return Status::InvalidArgument("tombstone with nonzero lengths");
  out->clear();
  out->reserve(block_size);
  PutBytes(out, kLmbMagic, 4);
  PutU16(out, kFormatVersion);
  PutU16(out, static_cast<uint16_t>(lmb.record_type));
  PutBytes(out, lmb.object_id.bytes.data(), 32);
  PutU64(out, lmb.version);
  PutU32(out, lmb.segment_id);
  PutU32(out, lmb.complete ? kFlagComplete : 0);
  PutU64(out, lmb.segment_length);
  PutU64(out, lmb.fragment_length);
  PutU64(out, lmb.entry_timestamp);
  PutU32(out, lmb.payload_checksum);
  PutU32(out, crc32c::Value(out->data(), out->size()));
  out->resize(block_size, 0);
  return Status::OK();
}

Status DecodeLmb(std::span<const uint8_t> block, LayoutMarkerBlock* out) {
  if (block.size() < kLmbHeaderBytes)
    return Status::TruncatedRecord("marker block too short");
  if (!CheckMagic(block, kLmbMagic)) return Status::BadMagic("marker block");
  Reader r(block);
  r.Skip(4);
  const uint16_t version = r.U16();
  if (version != kFormatVersion)
    return Status::UnknownVersion("marker block format " +
                                  std::to_string(version));
  const uint16_t type = r.U16();
  if (type != static_cast<uint16_t>(RecordType::kSegment) &&
      type != static_cast<uint16_t>(RecordType::kTombstone))
    return Status::Corruption("unknown record type");
  out->record_type = static_cast<RecordType>(type);
  r.Bytes(out->object_id.bytes.data(), 32);
  out->version = r.U64();
  out->segment_id = r.U32();
  out->complete = (r.U32() & kFlagComplete) != 0;
  out->segment_length = r.U64();
  out->fragment_length = r.U64();
  out->entry_timestamp = r.U64();
  out->payload_checksum = r.U32();
  const size_t crc_pos = r.pos();
  const uint32_t stored = r.U32();
  if (!r.ok()) return Status::TruncatedRecord("marker block");
  if (crc32c::Value(block.data(), crc_pos) != stored)
    return Status::BadChecksum("marker block");
  return Status::OK();
}

uint32_t DigestBlocks(size_t entry_count, uint32_t block_size) {
  const uint64_t need = kDigestHeaderBytes + kDigestEntryBytes * entry_count +
                        4 /*checksum*/ + kDigestTrailerBytes;
  return static_cast<uint32_t>((need + block_size - 1) / block_size);
}

Status EncodeDigest(const ZoneSetDigest& digest, uint32_t block_size,
                    std::vector<uint8_t>* out) {
  if (block_size < kDigestHeaderBytes + 4 + kDigestTrailerBytes)
    return Status::InvalidArgument("block size too small for digest");
  out->clear();
  PutBytes(out, kDigestMagic, 4);
  PutU16(out, kFormatVersion);
  PutU16(out, 0);
  PutU32(out, static_cast<uint32_t>(digest.entries.size()));
  for (const DigestEntry& e : digest.entries) {
    PutU16(out, static_cast<uint16_t>(e.record_type));
    PutU16(out, e.complete ? 1 : 0);
    PutU32(out, e.segment_id);
    PutBytes(out, e.object_id.bytes.data(), 32);
    PutU64(out, e.version);
    PutU64(out, e.segment_length);
    PutU64(out, e.fragment_length);
    PutU64(out, e.entry_timestamp);
    PutU64(out, e.offset);
  }
  PutU32(out, crc32c::Value(out->data(), out->size()));
  const uint32_t blocks = DigestBlocks(digest.entries.size(), block_size);
  out->resize(static_cast<size_t>(blocks) * block_size, 0);
  // Trailer in the last 16 bytes of the final block.
  std::vector<uint8_t> trailer;
  PutBytes(&trailer, kDigestTrailerMagic, 4);
  PutU32(&trailer, blocks);
  PutU32(&trailer, static_cast<uint32_t>(digest.entries.size()));
  PutU32(&trailer, crc32c::Value(trailer.data(), trailer.size()));
  memcpy(out->data() + out->size() - kDigestTrailerBytes, trailer.data(),
         kDigestTrailerBytes);
  return Status::OK();
}

Status DigestBlocksFromTailBlock(std::span<const uint8_t> last_block,
                                 uint32_t* blocks_out) {
  if (last_block.size() < kDigestTrailerBytes)
    return Status::TruncatedRecord("digest trailer");
  const uint8_t* t = last_block.data() + last_block.size() - kDigestTrailerBytes;
  if (memcmp(t, kDigestTrailerMagic, 4) != 0)
    return Status::BadMagic("digest trailer");
  Reader r(std::span<const uint8_t>(t, kDigestTrailerBytes));
  r.Skip(4);
  const uint32_t blocks = r.U32();
  r.U32();  // entry count, informational
  const uint32_t stored = r.U32();
  if (crc32c::Value(t, 12) != stored)
    return Status::BadChecksum("digest trailer");
  if (blocks == 0) return Status::Corruption("digest trailer block count");
  *blocks_out = blocks;
  return Status::OK();
}

bool LooksLikeDigestStart(std::span<const uint8_t> block) {
  return CheckMagic(block, kDigestMagic);
}

Status DecodeDigest(std::span<const uint8_t> buf, ZoneSetDigest* out) {
  if (buf.size() < kDigestHeaderBytes + 4)
    return Status::TruncatedRecord("digest too short");
  if (!CheckMagic(buf, kDigestMagic)) return Status::BadMagic("digest");
  Reader r(buf);
  r.Skip(4);
  const uint16_t version = r.U16();
  if (version != kFormatVersion) return Status::UnknownVersion("digest format");
  r.U16();
  const uint32_t count = r.U32();
  const uint64_t body = kDigestHeaderBytes +
                        static_cast<uint64_t>(count) * kDigestEntryBytes;
  if (body + 4 > buf.size()) return Status::TruncatedRecord("digest entries");
  out->entries.clear();
  out->entries.reserve(count);
  for (uint32_t i = 0; i < count; i++) {
    DigestEntry e;
    const uint16_t type = r.U16();
    e.complete = r.U16() != 0;
    e.segment_id = r.U32();
    r.Bytes(e.object_id.bytes.data(), 32);
    e.version = r.U64();
    e.segment_length = r.U64();
    e.fragment_length = r.U64();
    e.entry_timestamp = r.U64();
    e.offset = r.U64();
    if (type != static_cast<uint16_t>(RecordType::kSegment) &&
        type != static_cast<uint16_t>(RecordType::kTombstone))
      return Status::Corruption("digest entry type");
    e.record_type = static_cast<RecordType>(type);
    out->entries.push_back(std::move(e));
  }
  const size_t crc_pos = r.pos();
  const uint32_t stored = r.U32();
  if (!r.ok()) return Status::TruncatedRecord("digest checksum");
  if (crc32c::Value(buf.data(), crc_pos) != stored)
    return Status::BadChecksum("digest");
  return Status::OK();
}

Status EncodeSuperblock(const Superblock& sb, uint32_t block_size,
                        std::vector<uint8_t>* out) {
  out->clear();
  PutBytes(out, kSuperblockMagic, 4);
  PutU16(out, kFormatVersion);
  PutU16(out, sb.clean_shutdown ? kSbFlagCleanShutdown : 0);
  const size_t blocks_at = out->size();
  PutU32(out, 0);  // total_blocks, patched below
  PutU32(out, sb.block_size);
  PutU64(out, sb.sequence);
  PutU64(out, sb.written_at);
  PutU64(out, sb.logical_clock);
  PutU64(out, sb.zone_capacity);
  PutU32(out, sb.zone_count);
  PutU32(out, sb.width);
  PutU32(out, sb.superblock_zones_per_drive);
  PutU32(out, static_cast<uint32_t>(sb.drives.size()));
  PutU32(out, static_cast<uint32_t>(sb.zone_sets.size()));
  PutU32(out, static_cast<uint32_t>(sb.manifests.size()));
  for (const DriveDescriptor& d : sb.drives) {
    PutU32(out, d.drive_id);
    PutU32(out, d.zone_count);
    PutU32(out, d.status);
    PutBytes(out, d.uuid.data(), 16);
  }
  for (const ZoneSetRow& row : sb.zone_sets) {
    PutU32(out, row.zoneset_id);
    out->push_back(static_cast<uint8_t>(row.state));
    out->push_back(0);
    out->push_back(0);
    out->push_back(0);
    PutU32(out, static_cast<uint32_t>(row.members.size()));
    PutU64(out, row.dead_bytes);
    for (const ZoneMember& m : row.members) {
      PutU32(out, m.drive_id);
      PutU32(out, m.zone_id);
    }
  }
  for (const SnapshotManifest& m : sb.manifests) {
    PutU64(out, m.snapshot_id);
    PutU64(out, m.created_at);
    PutU64(out, m.total_length);
    PutU32(out, m.content_checksum);
    PutU32(out, m.complete ? kManifestFlagComplete : 0);
    PutU32(out, static_cast<uint32_t>(m.index_set_ids.size()));
    PutU32(out, static_cast<uint32_t>(m.extents.size()));
    for (uint32_t id : m.index_set_ids) PutU32(out, id);
    for (const SnapshotExtent& e : m.extents) {
      PutU32(out, e.zoneset_id);
      PutU32(out, 0);
      PutU64(out, e.offset);
      PutU64(out, e.length);
    }
  }
  const uint64_t content = out->size() + 4;
  const uint32_t blocks =
      static_cast<uint32_t>((content + block_size - 1) / block_size);
  PatchU32(out, blocks_at, blocks);
  PutU32(out, crc32c::Value(out->data(), out->size()));
  out->resize(static_cast<size_t>(blocks) * block_size, 0);
  return Status::OK();
}

Status SuperblockBlocksFromHeader(std::span<const uint8_t> first_block,
                                  uint32_t* blocks_out) {
  if (first_block.size() < 12) return Status::TruncatedRecord("superblock");
  if (!CheckMagic(first_block, kSuperblockMagic))
    return Status::BadMagic("superblock");
  Reader r(first_block);
  r.Skip(4);
  if (r.U16() != kFormatVersion)
    return Status::UnknownVersion("superblock format");
  r.U16();
  const uint32_t blocks = r.U32();
  if (blocks == 0) return Status::Corruption("superblock block count");
  *blocks_out = blocks;
  return Status::OK();
}

Status DecodeSuperblock(std::span<const uint8_t> buf, Superblock* out) {
  if (buf.size() < 60) return Status::TruncatedRecord("superblock too short");
  if (!CheckMagic(buf, kSuperblockMagic)) return Status::BadMagic("superblock");
  Reader r(buf);
  r.Skip(4);
  const uint16_t version = r.U16();
  if (version != kFormatVersion)
    return Status::UnknownVersion("superblock format");
  const uint16_t flags = r.U16();
  out->clean_shutdown = (flags & kSbFlagCleanShutdown) != 0;
  r.U32();  // total_blocks
  out->block_size = r.U32();
  out->sequence = r.U64();
  out->written_at = r.U64();
  out->logical_clock = r.U64();
  out->zone_capacity = r.U64();
  out->zone_count = r.U32();
  out->width = r.U32();
  out->superblock_zones_per_drive = r.U32();
  const uint32_t drive_count = r.U32();
  const uint32_t set_count = r.U32();
  const uint32_t manifest_count = r.U32();
  if (manifest_count > 2) return Status::Corruption("too many manifests");
  out->drives.clear();
  for (uint32_t i = 0; i < drive_count && r.ok(); i++) {
    DriveDescriptor d;
    d.drive_id = r.U32();
    d.zone_count = r.U32();
    d.status = r.U32();
    r.Bytes(d.uuid.data(), 16);
    out->drives.push_back(d);
  }
  out->zone_sets.clear();
  out->zone_sets.reserve(set_count);
  for (uint32_t i = 0; i < set_count && r.ok(); i++) {
    ZoneSetRow row;
    row.zoneset_id = r.U32();
    uint8_t state;
    r.Bytes(&state, 1);
    if (state > static_cast<uint8_t>(ZoneSetState::kIndex))
      return Status::Corruption("zone set state");
    row.state = static_cast<ZoneSetState>(state);
    r.Skip(3);
    const uint32_t member_count = r.U32();
    row.dead_bytes = r.U64();
    for (uint32_t j = 0; j < member_count && r.ok(); j++) {
      ZoneMember m;
      m.drive_id = r.U32();
      m.zone_id = r.U32();
      row.members.push_back(m);
    }
    out->zone_sets.push_back(std::move(row));
  }
  out->manifests.clear();
  for (uint32_t i = 0; i < manifest_count && r.ok(); i++) {
    SnapshotManifest m;
    m.snapshot_id = r.U64();
    m.created_at = r.U64();
    m.total_length = r.U64();
    m.content_checksum = r.U32();
    m.complete = (r.U32() & kManifestFlagComplete) != 0;
    const uint32_t id_count = r.U32();
    const uint32_t extent_count = r.U32();
    for (uint32_t j = 0; j < id_count && r.ok(); j++)
      m.index_set_ids.push_back(r.U32());
    for (uint32_t j = 0; j < extent_count && r.ok(); j++) {
      SnapshotExtent e;
      e.zoneset_id = r.U32();
      r.U32();
      e.offset = r.U64();
      e.length = r.U64();
      m.extents.push_back(e);
    }
    out->manifests.push_back(std::move(m));
  }
  const size_t crc_pos = r.pos();
  const uint32_t stored = r.U32();
  if (!r.ok()) return Status::TruncatedRecord("superblock body");
  if (crc32c::Value(buf.data(), crc_pos) != stored)
    return Status::BadChecksum("superblock");
  return Status::OK();
}

}  // namespace zonestore
