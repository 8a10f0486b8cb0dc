// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#pragma once

#include <atomic>
#include <cstdint>
#include <string>

namespace zonestore {

// Counters shared across the store, the garbage collector, and the bench
// harness. Total device bytes come from the drive append counters; parity
// bytes are tracked at the striping layer so write amplification can be
// reported both with and without parity.
struct StoreMetrics {
  std::atomic<uint64_t> bytes_ingested{0};
  std::atomic<uint64_t> parity_bytes{0};
  std::atomic<uint64_t> read_bytes{0};
  std::atomic<uint64_t> puts{0};
  std::atomic<uint64_t> gets{0};
  std::atomic<uint64_t> deletes{0};
  std::atomic<uint64_t> degraded_reads{0};
  std::atomic<uint64_t> bytes_relocated{0};
  std::atomic<uint64_t> bytes_reclaimed{0};
  std::atomic<uint64_t> cleans_completed{0};
  std::atomic<uint64_t> snapshots_taken{0};
  std::atomic<uint64_t> snapshot_quiesce_micros{0};
};

struct MetricsSample {
  uint64_t bytes_ingested = 0;
  uint64_t device_bytes_appended = 0;  // sum over drives
  uint64_t parity_bytes = 0;
  uint64_t read_bytes = 0;
  uint64_t puts = 0;
  uint64_t gets = 0;
  uint64_t deletes = 0;
  uint64_t degraded_reads = 0;
  uint64_t bytes_relocated = 0;
  uint64_t bytes_reclaimed = 0;
  uint64_t cleans_completed = 0;

  MetricsSample Delta(const MetricsSample& earlier) const {
    MetricsSample d = *this;
    d.bytes_ingested -= earlier.bytes_ingested;
    d.device_bytes_appended -= earlier.device_bytes_appended;
    d.parity_bytes -= earlier.parity_bytes;
    d.read_bytes -= earlier.read_bytes;
    d.puts -= earlier.puts;
    d.gets -= earlier.gets;
    d.deletes -= earlier.deletes;
    d.degraded_reads -= earlier.degraded_reads;
    d.bytes_relocated -= earlier.bytes_relocated;
    d.bytes_reclaimed -= earlier.bytes_reclaimed;
    d.cleans_completed -= earlier.cleans_completed;
    return d;
  }

  double WaTotal() const {
    return bytes_ingested ? static_cast<double>(device_bytes_appended) /
                                static_cast<double>(bytes_ingested)
                          : 0.0;
  }
  double WaData() const {
    return bytes_ingested
               ? static_cast<double>(device_bytes_appended - parity_bytes) /
                     static_cast<double>(bytes_ingested)
               : 0.0;
  }
};

}  // namespace zonestore
