// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#pragma once

#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <thread>

#include "zonestore/clock.h"
#include "zonestore/index.h"
#include "zonestore/metrics.h"
#include "zonestore/zoneset.h"

namespace zonestore {

struct GcPolicy {
  // Free (EMPTY + AVAILABLE) sets below this trigger urgent cleaning.
  uint32_t low_watermark = 2;
  // Background cadence between opportunistic passes.
  uint32_t idle_interval_ms = 200;
  uint32_t max_concurrent_cleans = 1;
  // An idle pass only cleans sets at least this dead, so background GC does
  // not inflate write amplification by relocating mostly-live sets.
  double idle_min_dead_fraction = 0.9;
};

// Chooses the CLOSED/INDEXED set with the most dead bytes; ties break to the
// lowest id; nothing qualifies when every candidate has zero dead bytes.
std::optional<uint32_t> SelectGreedyVictim(
    const std::vector<ZoneSetInfo>& table);

// Greedy cleaner: relocates live segments of the victim into its own open
// destination set, carries forward tombstones newer than the last index
// snapshot, then trims the victim. Destination opens bypass the reserve so
// cleaning can always proceed; one clean runs at a time.
class GreedyCollector {
 public:
  struct Context {
    ZoneSetManager* mgr = nullptr;
    OperationalIndex* index = nullptr;
    LogicalClock* clock = nullptr;
    StoreMetrics* metrics = nullptr;
    std::shared_mutex* mutation_gate = nullptr;
    std::function<Timestamp()> last_snapshot_time;
  };

  GreedyCollector(Context ctx, GcPolicy policy);
  ~GreedyCollector();

  std::optional<uint32_t> SelectVictim() const;
  Status CleanZoneSet(uint32_t zoneset_id, uint64_t* reclaimed_bytes,
                      bool caller_holds_gate);
  // Cleans until at least `want` free sets exist (or no victim remains).
  Status EnsureFreeSets(uint32_t want, bool caller_holds_gate);

  void Start();
  void Stop();
  void Poke();  // signals space pressure to the background task

  Status CloseDestination();  // close the GC output set (shutdown, snapshot)

 private:
  void BackgroundLoop();
  Status EnsureDestination(uint64_t needed_per_zone);

  Context ctx_;
  GcPolicy policy_;
  std::mutex clean_mu_;  // one clean at a time
  std::unique_ptr<ZoneSetWriter> writer_;

  std::thread thread_;
  std::mutex bg_mu_;
  std::condition_variable bg_cv_;
  bool stop_ = false;
  bool poked_ = false;
};

}  // namespace zonestore
