// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#pragma once

#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "zonestore/status.h"
#include "zonestore/types.h"

namespace zonestore {

// Index key: total order is lexicographic over (object_id, version,
// segment_id, complete), which makes prefix scans by object id a range scan.
struct IndexKey {
  ObjectId object_id;
  Timestamp version = 0;
  uint32_t segment_id = 0;
  bool complete = false;

  auto operator<=>(const IndexKey&) const = default;
};

struct IndexValue {
  uint32_t zoneset_id = 0;
  uint64_t offset = 0;           // zone-set-relative offset of the marker block
  uint64_t length = 0;           // true pre-coding segment length
  Timestamp entry_timestamp = 0; // write/relocation time

  bool operator==(const IndexValue&) const = default;
};

using IndexEntry = std::pair<IndexKey, IndexValue>;

// Operational index: an ordered in-memory map with prefix iteration.
// Readers run concurrently; mutations are internally synchronized and
// additionally serialized against snapshots by the store's mutation gate.
class OperationalIndex {
 public:
  void Insert(const IndexKey& key, const IndexValue& value);
  bool Remove(const IndexKey& key);
  bool Get(const IndexKey& key, IndexValue* value) const;
  // Compare-and-swap used by relocation so a racing delete wins.
  bool UpdateIfEqual(const IndexKey& key, const IndexValue& expected,
                     const IndexValue& next);

  // All entries whose key carries this object id, sorted by key.
  std::vector<IndexEntry> LookupObject(const ObjectId& id) const;

  // Greatest version having an entry with the complete bit.
  std::optional<Timestamp> LatestCompleteVersion(const ObjectId& id) const;
  // Greatest version whose complete entry is backed by the full segment
  // chain 0..m. The two differ only when a crash without durable
  // acknowledgments dropped an interior segment.
  std::optional<Timestamp> LatestCompleteChainedVersion(const ObjectId& id) const;

  // Removes entries of the object with version < bound (overwrite
  // supersession) or <= bound (tombstones). Returns the removed entries.
  std::vector<IndexEntry> RemoveVersionsBelow(const ObjectId& id,
                                              Timestamp bound);
  std::vector<IndexEntry> RemoveVersionsUpTo(const ObjectId& id,
                                             Timestamp bound);

  size_t size() const;
  void Clear();
  std::vector<IndexEntry> Dump() const;
  void ForEach(const std::function<void(const IndexKey&, const IndexValue&)>& fn) const;
  // Distinct object ids present (for recovery's supersession pass).
  std::vector<ObjectId> ObjectIds() const;
  // Largest timestamp present in any key or value (clock restart floor).
  Timestamp MaxTimestamp() const;

 private:
  static std::optional<Timestamp> LatestCompleteIn(
      const std::vector<IndexEntry>& entries, bool require_chain);

  mutable std::shared_mutex mu_;
  std::map<IndexKey, IndexValue> map_;
};

// Serialized index image: one header, sorted fixed-width records, CRC32C
// trailer. The same bytes are stored as the flash snapshot file and inside
// dedicated INDEX zone sets.
Status SerializeIndex(const OperationalIndex& index, uint64_t snapshot_id,
                      Timestamp created_at, std::vector<uint8_t>* out);
Status DeserializeIndex(std::span<const uint8_t> image, OperationalIndex* out,
                        uint64_t* snapshot_id, Timestamp* created_at);

}  // namespace zonestore
