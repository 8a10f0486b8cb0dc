// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#pragma once

#include <atomic>
#include <cstdint>

#include "zonestore/types.h"

namespace zonestore {

// Store-wide monotonic logical time source. Every version timestamp, delete
// timestamp and entry timestamp is drawn from one instance, so ordering
// comparisons between them are always well defined, including within a
// single tick. The counter restarts from the recovered maximum (superblock
// clock floor, index entries, replayed records), never from wall time, which
// keeps benchmark runs reproducible.
class LogicalClock {
 public:
  explicit LogicalClock(Timestamp start = 1) : last_(start) {}

  Timestamp Next() { return last_.fetch_add(1, std::memory_order_relaxed) + 1; }

  Timestamp Peek() const { return last_.load(std::memory_order_relaxed); }

  // Raises the floor so that future values exceed every timestamp observed
  // during recovery.
  void AdvanceTo(Timestamp seen) {
    Timestamp cur = last_.load(std::memory_order_relaxed);
    while (cur < seen &&
           !last_.compare_exchange_weak(cur, seen, std::memory_order_relaxed)) {
    }
  }

 private:
  std::atomic<Timestamp> last_;
};

}  // namespace zonestore
