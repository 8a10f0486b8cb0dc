// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "zonestore/index.h"
#include "zonestore/status.h"

namespace zonestore {

// Flash-side persistence of the operational index:
//
//   <flash>/index/current/run-<n>.dat   periodically rewritten sorted run
//   <flash>/index/current/manifest      key=value; names the run and the
//                                       superblock sequence it matches
//   <flash>/index/snapshot-<id>.dat     consistent snapshot images
//
// The current/ tree carries no crash-consistency guarantees of its own:
// after an unclean shutdown it is distrusted entirely and the index is
// rebuilt from the newest snapshot plus replay. It is trusted only when the
// manifest's sequence equals the superblock sequence of a clean shutdown.
class FlashIndexStore {
 public:
  explicit FlashIndexStore(std::string flash_dir);

  const std::string& dir() const { return dir_; }

  // The manifest also carries the exact per-set dead-space ledger, which is
  // only trusted on the clean-shutdown path (crash recovery recomputes it).
  Status WriteRuns(const OperationalIndex& index, uint64_t sb_sequence,
                   const std::map<uint32_t, uint64_t>& dead_bytes);
  Status LoadRuns(OperationalIndex* index, uint64_t* sb_sequence,
                  std::map<uint32_t, uint64_t>* dead_bytes);

  Status WriteSnapshotFile(uint64_t snapshot_id,
                           std::span<const uint8_t> image);
  Status ReadSnapshotFile(uint64_t snapshot_id, std::vector<uint8_t>* image);
  // Removes snapshot files other than the ids to keep.
  void PruneSnapshots(const std::vector<uint64_t>& keep);

  std::string SnapshotPath(uint64_t snapshot_id) const;

 private:
  std::string dir_;
};

}  // namespace zonestore
