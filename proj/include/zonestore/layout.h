// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "zonestore/status.h"
#include "zonestore/types.h"

namespace zonestore {

// Bit-exact encoders/decoders for every durable record. All fields are
// little-endian and fixed width; every encoding is a whole number of blocks
// so records can be appended directly to zones. The byte formats are
// documented in docs/ondisk-format.md and are the repo's durable contract.

enum class RecordType : uint16_t {
  kSegment = 1,
  kTombstone = 2,
};

// Per-fragment on-disk header, one block, written ahead of each fragment in
// every zone of a zone set. Doubles as the journal record that index
// recovery replays. Tombstones are marker-only records (both lengths zero).
struct LayoutMarkerBlock {
  RecordType record_type = RecordType::kSegment;
  ObjectId object_id;
  Timestamp version = 0;
  uint32_t segment_id = 0;
  bool complete = false;         // set on the last segment of a version
  uint64_t segment_length = 0;   // pre-coding segment payload bytes
  uint64_t fragment_length = 0;  // stored fragment bytes in this zone (block multiple)
  Timestamp entry_timestamp = 0; // write or relocation time
  uint32_t payload_checksum = 0; // CRC32C of the stored fragment bytes

  bool operator==(const LayoutMarkerBlock&) const = default;
};

Status EncodeLmb(const LayoutMarkerBlock& lmb, uint32_t block_size,
                 std::vector<uint8_t>* out);
Status DecodeLmb(std::span<const uint8_t> block, LayoutMarkerBlock* out);

// One line of a zone-set digest: the marker fields plus where the record
// lives inside the zone set. The per-zone payload checksum is not carried
// because the digest is replicated identically to every zone.
struct DigestEntry {
  RecordType record_type = RecordType::kSegment;
  bool complete = false;
  ObjectId object_id;
  Timestamp version = 0;
  uint32_t segment_id = 0;
  uint64_t segment_length = 0;
  uint64_t fragment_length = 0;
  Timestamp entry_timestamp = 0;
  uint64_t offset = 0;  // zone-set-relative offset of the record's marker block

  bool operator==(const DigestEntry&) const = default;
};

struct ZoneSetDigest {
  std::vector<DigestEntry> entries;  // in append order

  bool operator==(const ZoneSetDigest&) const = default;
};

// The digest is written as the final record of a zone when the set closes.
// Its last block ends with a fixed trailer carrying the digest's block
// count, so recovery can locate the whole digest from the write pointer
// with one read.
Status EncodeDigest(const ZoneSetDigest& digest, uint32_t block_size,
                    std::vector<uint8_t>* out);
Status DecodeDigest(std::span<const uint8_t> buf, ZoneSetDigest* out);
uint32_t DigestBlocks(size_t entry_count, uint32_t block_size);
// Inspects the final block of a candidate digest; on success returns the
// digest's total block count.
Status DigestBlocksFromTailBlock(std::span<const uint8_t> last_block,
                                 uint32_t* blocks_out);
// True when the block begins with the digest magic (marks the clean end of
// a marker-block walk inside a closed zone).
bool LooksLikeDigestStart(std::span<const uint8_t> block);

enum class ZoneSetState : uint8_t {
  kEmpty = 0,
  kAvailable = 1,
  kOpen = 2,
  kClosed = 3,
  kIndexed = 4,
  kIndex = 5,
};

const char* ZoneSetStateName(ZoneSetState s);

struct ZoneMember {
  uint32_t drive_id = 0;
  uint32_t zone_id = 0;

  bool operator==(const ZoneMember&) const = default;
};

struct ZoneSetRow {
  uint32_t zoneset_id = 0;
  ZoneSetState state = ZoneSetState::kEmpty;
  uint64_t dead_bytes = 0;  // as of the last index snapshot
  std::vector<ZoneMember> members;

  bool operator==(const ZoneSetRow&) const = default;
};

struct DriveDescriptor {
  uint32_t drive_id = 0;
  uint32_t zone_count = 0;
  uint32_t status = 0;  // 0 = active, 1 = retired after failure
  std::array<uint8_t, 16> uuid{};

  bool operator==(const DriveDescriptor&) const = default;
};

struct SnapshotExtent {
  uint32_t zoneset_id = 0;
  uint64_t offset = 0;  // zone-set-relative offset of the segment marker
  uint64_t length = 0;  // pre-coding payload bytes of the extent

  bool operator==(const SnapshotExtent&) const = default;
};

struct SnapshotManifest {
  uint64_t snapshot_id = 0;
  Timestamp created_at = 0;
  bool complete = false;          // the copy into INDEX zone sets finished
  uint64_t total_length = 0;      // serialized index image bytes
  uint32_t content_checksum = 0;  // CRC32C of the serialized image
  std::vector<uint32_t> index_set_ids;
  std::vector<SnapshotExtent> extents;  // concatenated in order

  bool operator==(const SnapshotManifest&) const = default;
};

// Replicated bootstrap root: drive descriptors, the zone-set table, index
// snapshot locations, and the logical clock floor. Appended to dedicated
// superblock zones; the replica with the highest sequence wins.
struct Superblock {
  uint64_t sequence = 0;
  uint64_t written_at = 0;  // wall-clock micros, informational only
  bool clean_shutdown = false;
  Timestamp logical_clock = 0;
  uint32_t block_size = 4096;
  uint64_t zone_capacity = 0;
  uint32_t zone_count = 0;  // per drive
  uint32_t width = 0;
  uint32_t superblock_zones_per_drive = 0;
  std::vector<DriveDescriptor> drives;
  std::vector<ZoneSetRow> zone_sets;
  std::vector<SnapshotManifest> manifests;  // up to two

  bool operator==(const Superblock&) const = default;
};

Status EncodeSuperblock(const Superblock& sb, uint32_t block_size,
                        std::vector<uint8_t>* out);
Status DecodeSuperblock(std::span<const uint8_t> buf, Superblock* out);
// Inspects the first block of a candidate superblock; on success returns
// its total block count so superblock zones can be walked record to record.
Status SuperblockBlocksFromHeader(std::span<const uint8_t> first_block,
                                  uint32_t* blocks_out);

}  // namespace zonestore
