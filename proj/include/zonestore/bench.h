// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#pragma once

#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "zonestore/store.h"

namespace zonestore {
namespace bench {

// Object sizes: one fixed size, or a log-normal distribution parameterized
// by its mode and sigma, truncated to [min_bytes, max_bytes] by rejection.
struct SizeModel {
  enum class Kind { kFixed, kLogNormal };
  Kind kind = Kind::kFixed;
  uint64_t fixed_bytes = 1ull << 20;
  uint64_t mode_bytes = 2ull << 20;
  double sigma = 1.0;
  uint64_t min_bytes = 16ull << 10;
  uint64_t max_bytes = 160ull << 20;

  static SizeModel Fixed(uint64_t bytes) {
    SizeModel m;
    m.kind = Kind::kFixed;
    m.fixed_bytes = bytes;
    return m;
  }
  static SizeModel LogNormal(uint64_t mode, double sigma, uint64_t min,
                             uint64_t max) {
    SizeModel m;
    m.kind = Kind::kLogNormal;
    m.mode_bytes = mode;
    m.sigma = sigma;
    m.min_bytes = min;
    m.max_bytes = max;
    return m;
  }
};

uint64_t SampleSize(const SizeModel& model, std::mt19937_64& rng);

struct WorkloadConfig {
  SizeModel size_model;
  double target_utilization = 0.8;
  uint64_t total_ingest = 0;  // churn budget, client bytes
  uint32_t thread_count = 1;
  uint64_t seed = 1;
};

// Deterministic payloads: the content of an object is a pure function of
// its payload seed, so verification only needs (seed, length, checksum).
void FillPayload(uint64_t payload_seed, std::span<uint8_t> out);
uint32_t PayloadChecksum(uint64_t payload_seed, uint64_t length);

// Ground truth mirror of every acknowledged operation.
struct ShadowObject {
  Timestamp version = 0;
  uint64_t length = 0;
  uint32_t checksum = 0;
  uint64_t payload_seed = 0;

  bool operator==(const ShadowObject&) const = default;
};

class ShadowMap {
 public:
  void RecordPut(const ObjectId& id, Timestamp version, uint64_t length,
                 uint32_t checksum, uint64_t payload_seed);
  void RecordDelete(const ObjectId& id);
  std::optional<ShadowObject> Find(const ObjectId& id) const;
  uint64_t live_bytes() const { return live_bytes_; }
  size_t size() const { return objects_.size(); }
  const std::map<ObjectId, ShadowObject>& objects() const { return objects_; }
  bool operator==(const ShadowMap& other) const {
    return objects_ == other.objects_;
  }

 private:
  std::map<ObjectId, ShadowObject> objects_;
  uint64_t live_bytes_ = 0;
};

// Seeded, reproducible PUT/DELETE stream. During the fill phase only PUTs
// are emitted; once live bytes would exceed target_utilization * capacity,
// each PUT is preceded by uniform-random deletes freeing at least the
// incoming object's size.
class WorkloadGenerator {
 public:
  struct Op {
    enum class Kind { kPut, kDelete };
    Kind kind = Kind::kPut;
    ObjectId id;
    uint64_t size = 0;          // puts only
    uint64_t payload_seed = 0;  // puts only
  };

  WorkloadGenerator(const WorkloadConfig& config, uint64_t capacity_bytes);

  Op Next();
  // True when the next op would start deleting, i.e. the fill target is met.
  bool FillTargetReached();

  uint64_t live_bytes() const { return live_bytes_; }
  size_t live_count() const { return live_.size(); }

 private:
  void PlanNextPut();

  WorkloadConfig config_;
  uint64_t capacity_;
  std::mt19937_64 rng_;
  std::deque<Op> queue_;
  std::vector<std::pair<ObjectId, uint64_t>> live_;  // id, size
  uint64_t live_bytes_ = 0;
  uint64_t next_payload_seed_;
};

struct RunMetrics {
  uint64_t bytes_ingested = 0;
  uint64_t bytes_written_total = 0;
  uint64_t bytes_written_excl_parity = 0;
  uint64_t read_bytes = 0;
  uint64_t puts = 0;
  uint64_t gets = 0;
  uint64_t deletes = 0;
  uint64_t cleans = 0;
  uint64_t bytes_relocated = 0;
  uint64_t bytes_reclaimed = 0;
  double wa_total = 0.0;
  double wa_data = 0.0;
  double wall_seconds = 0.0;

  std::string ToMetricsText() const;
};

// Client-payload capacity of the store for a given size mix, estimated by
// simulating the writer's packing arithmetic (marker blocks, padding,
// digest reservation) over sampled objects.
uint64_t EstimateEffectiveCapacity(const StoreOptions& options,
                                   const SizeModel& model, uint64_t seed = 7);

// Executes PUTs until the generator reaches its fill target. Every
// acknowledged op is mirrored into the shadow map.
Status RunFillPhase(ObjectStore* store, WorkloadGenerator* gen,
                    ShadowMap* shadow, RunMetrics* metrics);

// Steady-state churn: deletes-then-puts until `total_ingest` client bytes
// have been written in this phase. With verify_every_n > 0, every n-th
// operation is followed by a random full-object read-verify.
Status RunChurnPhase(ObjectStore* store, WorkloadGenerator* gen,
                     ShadowMap* shadow, uint64_t total_ingest,
                     uint32_t verify_every_n, RunMetrics* metrics);

// Random full-object reads with checksum verification.
Status RunReadPhase(ObjectStore* store, const ShadowMap& shadow,
                    uint32_t reads, uint64_t seed, RunMetrics* metrics);

// Reads back every shadow object and compares checksums; missing objects,
// extra objects, or mismatches fail.
Status VerifyStoreMatchesShadow(ObjectStore* store, const ShadowMap& shadow);

struct RecoveryBenchPoint {
  uint64_t post_snapshot_ingest = 0;
  uint32_t sets_examined = 0;
  double recovery_seconds = 0.0;  // median over repeats, read-only recovery
};

struct RecoveryBenchConfig {
  StoreOptions store;  // data_dir/flash_dir used as a prefix per point
  WorkloadConfig workload;
  double fill_fraction = 0.5;
  std::vector<uint64_t> post_snapshot_ingest;  // one point each
  uint32_t repeats = 5;
};

Status RunRecoveryBench(const RecoveryBenchConfig& config,
                        std::vector<RecoveryBenchPoint>* points);

// Least-squares fit helpers for the recovery trend.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LinearFit FitLine(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace bench
}  // namespace zonestore
