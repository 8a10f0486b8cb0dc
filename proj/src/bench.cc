// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/bench.h"

#include <algorithm>
#include <cstring>
#include <set>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "zonestore/crc32c.h"

namespace zonestore {
namespace bench {

namespace {

uint64_t XorShift64(uint64_t* s) {
  uint64_t x = *s;
  x ^= x << 13;
  x ^= x >> 7;
  x ^= x << 17;
  *s = x;
  return x;
}

ObjectId RandomId(std::mt19937_64& rng) {
  ObjectId id;
  for (size_t i = 0; i < 32; i += 8) {
    const uint64_t v = rng();
    memcpy(id.bytes.data() + i, &v, 8);
  }
  return id;
}

MetricsSample Sample(ObjectStore* store) { return store->SampleMetrics(); }

void FillRunMetrics(const MetricsSample& delta, double wall,
                    RunMetrics* metrics) {
  metrics->bytes_ingested = delta.bytes_ingested;
  metrics->bytes_written_total = delta.device_bytes_appended;
  metrics->bytes_written_excl_parity =
      delta.device_bytes_appended - delta.parity_bytes;
  metrics->read_bytes = delta.read_bytes;
  metrics->puts = delta.puts;
  metrics->gets = delta.gets;
  metrics->deletes = delta.deletes;
  metrics->cleans = delta.cleans_completed;
  metrics->bytes_relocated = delta.bytes_relocated;
  metrics->bytes_reclaimed = delta.bytes_reclaimed;
  metrics->wa_total = delta.WaTotal();
  metrics->wa_data = delta.WaData();
  metrics->wall_seconds = wall;
}

Status DoPut(ObjectStore* store, ShadowMap* shadow,
             const WorkloadGenerator::Op& op) {
  std::vector<uint8_t> payload(op.size);
  FillPayload(op.payload_seed, payload);
  const uint32_t checksum = crc32c::Value(payload.data(), payload.size());
  Timestamp version = 0;
  Status s = store->Put(op.id, payload, &version);
  if (!s.ok()) return s;
  shadow->RecordPut(op.id, version, op.size, checksum, op.payload_seed);
  return Status::OK();
}

Status DoDelete(ObjectStore* store, ShadowMap* shadow,
                const WorkloadGenerator::Op& op) {
  bool existed = false;
  Status s = store->Delete(op.id, &existed);
  if (!s.ok()) return s;
  shadow->RecordDelete(op.id);
  return Status::OK();
}

Status VerifyOne(ObjectStore* store, const ObjectId& id,
                 const ShadowObject& expect) {
  std::vector<uint8_t> data;
  Timestamp version = 0;
  Status s = store->Get(id, &data, &version);
  if (!s.ok()) return Status::Corruption("get failed for live object " +
                                         id.ToHex() + ": " + s.ToString());
  if (data.size() != expect.length)
    return Status::Corruption("length mismatch for " + id.ToHex());
  if (crc32c::Value(data.data(), data.size()) != expect.checksum)
    return Status::Corruption("checksum mismatch for " + id.ToHex());
  return Status::OK();
}

}  // namespace

uint64_t SampleSize(const SizeModel& model, std::mt19937_64& rng) {
  if (model.kind == SizeModel::Kind::kFixed) return model.fixed_bytes;
  // mode = exp(mu - sigma^2)  =>  mu = ln(mode) + sigma^2
  const double mu =
      std::log(static_cast<double>(model.mode_bytes)) + model.sigma * model.sigma;
  std::normal_distribution<double> normal(mu, model.sigma);
  for (int i = 0; i < 1000; i++) {
    const double v = std::exp(normal(rng));
    if (v >= static_cast<double>(model.min_bytes) &&
        v <= static_cast<double>(model.max_bytes))
      return static_cast<uint64_t>(v);
  }
  return model.min_bytes;
}

void FillPayload(uint64_t payload_seed, std::span<uint8_t> out) {
  uint64_t s = payload_seed ^ 0x9E3779B97F4A7C15ull;
  if (s == 0) s = 0x2545F4914F6CDD1Dull;
  size_t i = 0;
  for (; i + 8 <= out.size(); i += 8) {
    const uint64_t v = XorShift64(&s);
    memcpy(out.data() + i, &v, 8);
  }
  if (i < out.size()) {
    const uint64_t v = XorShift64(&s);
    memcpy(out.data() + i, &v, out.size() - i);
  }
}

uint32_t PayloadChecksum(uint64_t payload_seed, uint64_t length) {
  std::vector<uint8_t> buf(length);
  FillPayload(payload_seed, buf);
  return crc32c::Value(buf.data(), buf.size());
}

void ShadowMap::RecordPut(const ObjectId& id, Timestamp version,
                          uint64_t length, uint32_t checksum,
                          uint64_t payload_seed) {
  auto it = objects_.find(id);
  if (it != objects_.end()) {
    if (it->second.version > version) return;  // acked older concurrent put
    live_bytes_ -= it->second.length;
    objects_.erase(it);
  }
  objects_[id] = ShadowObject{version, length, checksum, payload_seed};
  live_bytes_ += length;
}

void ShadowMap::RecordDelete(const ObjectId& id) {
  auto it = objects_.find(id);
  if (it == objects_.end()) return;
  live_bytes_ -= it->second.length;
  objects_.erase(it);
}

std::optional<ShadowObject> ShadowMap::Find(const ObjectId& id) const {
  auto it = objects_.find(id);
  if (it == objects_.end()) return std::nullopt;
  return it->second;
}

WorkloadGenerator::WorkloadGenerator(const WorkloadConfig& config,
                                     uint64_t capacity_bytes)
    : config_(config),
      capacity_(capacity_bytes),
      rng_(config.seed),
      next_payload_seed_(config.seed * 0x9E3779B97F4A7C15ull + 1) {}

void WorkloadGenerator::PlanNextPut() {
  const uint64_t size = SampleSize(config_.size_model, rng_);
  const uint64_t limit = static_cast<uint64_t>(
      config_.target_utilization * static_cast<double>(capacity_));
  while (live_bytes_ + size > limit && !live_.empty()) {
    std::uniform_int_distribution<size_t> pick(0, live_.size() - 1);
    const size_t idx = pick(rng_);
    Op del;
    del.kind = Op::Kind::kDelete;
    del.id = live_[idx].first;
    queue_.push_back(del);
    live_bytes_ -= live_[idx].second;
    live_[idx] = live_.back();
    live_.pop_back();
  }
  Op put;
  put.kind = Op::Kind::kPut;
  put.id = RandomId(rng_);
  put.size = size;
  put.payload_seed = next_payload_seed_++;
  queue_.push_back(put);
  live_.push_back({put.id, size});
  live_bytes_ += size;
}

WorkloadGenerator::Op WorkloadGenerator::Next() {
  if (queue_.empty()) PlanNextPut();
  Op op = queue_.front();
  queue_.pop_front();
  return op;
}

bool WorkloadGenerator::FillTargetReached() {
  if (queue_.empty()) PlanNextPut();
  return queue_.front().kind == Op::Kind::kDelete;
}

std::string RunMetrics::ToMetricsText() const {
  std::ostringstream out;
  out << "bytes_ingested=" << bytes_ingested << "\n"
      << "bytes_written_total=" << bytes_written_total << "\n"
      << "bytes_written_excl_parity=" << bytes_written_excl_parity << "\n"
      << "read_bytes=" << read_bytes << "\n"
      << "puts=" << puts << "\n"
      << "gets=" << gets << "\n"
      << "deletes=" << deletes << "\n"
      << "cleans=" << cleans << "\n"
      << "bytes_relocated=" << bytes_relocated << "\n"
      << "bytes_reclaimed=" << bytes_reclaimed << "\n"
      << "wa_total=" << wa_total << "\n"
      << "wa_data=" << wa_data << "\n"
      << "wall_seconds=" << wall_seconds << "\n";
  return out.str();
}

uint64_t EstimateEffectiveCapacity(const StoreOptions& options,
                                   const SizeModel& model, uint64_t seed) {
  const uint32_t bs = options.block_size;
  const uint32_t k = options.width - 1;
  const uint64_t cap = options.zone_capacity;
  const uint64_t min_tail = options.min_tail_segment_bytes;
  std::mt19937_64 rng(seed);

  const uint32_t sim_sets = 40;
  uint64_t payload_total = 0;
  uint64_t write_offset = 0;
  size_t entries = 0;
  uint32_t sets_done = 0;
  // Mirrors the writer: per segment one marker block plus the padded
  // fragment per zone, a digest reservation that grows with the entry
  // count, and the adaptive tail policy.
  auto fits = [&](uint64_t per_zone) {
    const uint64_t reserve =
        static_cast<uint64_t>(DigestBlocks(entries + 1, bs)) * bs;
    return write_offset + per_zone + reserve <= cap;
  };
  while (sets_done < sim_sets) {
    uint64_t remaining = SampleSize(model, rng);
    payload_total += remaining;
    bool object_done = false;
    while (!object_done) {
      uint64_t want = std::min<uint64_t>(remaining, options.segment_bytes);
      SegmentShape shape = ShapeSegment(want, options.width, bs);
      if (!fits(shape.per_zone)) {
        // Shrink into the leftover when the tail stays reasonable.
        const uint64_t reserve =
            static_cast<uint64_t>(DigestBlocks(entries + 1, bs)) * bs;
        const uint64_t budget =
            cap > write_offset + reserve + bs
                ? cap - write_offset - reserve - bs
                : 0;
        const uint64_t fit = AlignDown(budget, bs) * k;
        if (fit >= min_tail && want > min_tail) {
          want = std::min(want, fit);
          shape = ShapeSegment(want, options.width, bs);
        } else {
          sets_done++;
          write_offset = 0;
          entries = 0;
          if (sets_done >= sim_sets) {
            payload_total -= remaining;  // object spills past the horizon
            object_done = true;
          }
          continue;
        }
      }
      write_offset += shape.per_zone;
      entries++;
      remaining -= want;
      if (remaining == 0) object_done = true;
    }
  }

  const uint64_t set_count =
      options.zone_count - options.superblock_zones_per_drive;
  const uint64_t reserved = options.gc_reserve_sets + 2;
  if (set_count <= reserved) return 0;
  const double per_set =
      static_cast<double>(payload_total) / static_cast<double>(sim_sets);
  return static_cast<uint64_t>(per_set *
                               static_cast<double>(set_count - reserved));
}

Status RunFillPhase(ObjectStore* store, WorkloadGenerator* gen,
                    ShadowMap* shadow, RunMetrics* metrics) {
  const auto t0 = std::chrono::steady_clock::now();
  const MetricsSample before = Sample(store);
  while (!gen->FillTargetReached()) {
    const WorkloadGenerator::Op op = gen->Next();
    Status s = op.kind == WorkloadGenerator::Op::Kind::kPut
                   ? DoPut(store, shadow, op)
                   : DoDelete(store, shadow, op);
    if (!s.ok()) return s;
  }
  if (metrics)
    FillRunMetrics(
        Sample(store).Delta(before),
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count(),
        metrics);
  return Status::OK();
}

Status RunChurnPhase(ObjectStore* store, WorkloadGenerator* gen,
                     ShadowMap* shadow, uint64_t total_ingest,
                     uint32_t verify_every_n, RunMetrics* metrics) {
  const auto t0 = std::chrono::steady_clock::now();
  const MetricsSample before = Sample(store);
  std::mt19937_64 verify_rng(gen->live_bytes() + 0x5bd1e995);
  uint64_t ingested = 0;
  uint64_t ops = 0;
  while (ingested < total_ingest) {
    const WorkloadGenerator::Op op = gen->Next();
    Status s;
    if (op.kind == WorkloadGenerator::Op::Kind::kPut) {
      s = DoPut(store, shadow, op);
      ingested += op.size;
    } else {
      s = DoDelete(store, shadow, op);
    }
    if (!s.ok()) return s;
    ops++;
    if (verify_every_n > 0 && ops % verify_every_n == 0 &&
        !shadow->objects().empty()) {
      std::uniform_int_distribution<size_t> pick(0,
                                                 shadow->objects().size() - 1);
      auto it = shadow->objects().begin();
      std::advance(it, pick(verify_rng));
      s = VerifyOne(store, it->first, it->second);
      if (!s.ok()) return s;
    }
  }
  if (metrics)
    FillRunMetrics(
        Sample(store).Delta(before),
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count(),
        metrics);
  return Status::OK();
}

Status RunReadPhase(ObjectStore* store, const ShadowMap& shadow,
                    uint32_t reads, uint64_t seed, RunMetrics* metrics) {
  const auto t0 = std::chrono::steady_clock::now();
  const MetricsSample before = Sample(store);
  if (shadow.objects().empty())
    return Status::InvalidArgument("nothing to read");
  std::mt19937_64 rng(seed);
  for (uint32_t i = 0; i < reads; i++) {
    std::uniform_int_distribution<size_t> pick(0, shadow.objects().size() - 1);
    auto it = shadow.objects().begin();
    std::advance(it, pick(rng));
    Status s = VerifyOne(store, it->first, it->second);
    if (!s.ok()) return s;
  }
  if (metrics)
    FillRunMetrics(
        Sample(store).Delta(before),
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count(),
        metrics);
  return Status::OK();
}

Status VerifyStoreMatchesShadow(ObjectStore* store, const ShadowMap& shadow) {
  for (const auto& [id, expect] : shadow.objects()) {
    Status s = VerifyOne(store, id, expect);
    if (!s.ok()) return s;
  }
  // No object outside the shadow may be readable.
  std::set<ObjectId> shadow_ids;
  for (const auto& [id, expect] : shadow.objects()) shadow_ids.insert(id);
  for (const auto& [key, value] : store->DumpIndex()) {
    if (key.object_id == SnapshotPayloadId()) continue;
    if (!key.complete) continue;
    if (!shadow_ids.count(key.object_id)) {
      // A complete version for an unknown object is only legal if GET
      // cannot assemble it (an incomplete chain).
      std::vector<uint8_t> data;
      Status s = store->Get(key.object_id, &data, nullptr);
      if (s.ok())
        return Status::Corruption("unexpected readable object " +
                                  key.object_id.ToHex());
    }
  }
  return Status::OK();
}

LinearFit FitLine(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit fit;
  const size_t n = x.size();
  if (n < 2 || y.size() != n) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; i++) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  if (denom == 0) return fit;
  fit.slope = (dn * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / dn;
  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / dn;
  for (size_t i = 0; i < n; i++) {
    const double pred = fit.slope * x[i] + fit.intercept;
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
  }
  fit.r_squared = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

Status RunRecoveryBench(const RecoveryBenchConfig& config,
                        std::vector<RecoveryBenchPoint>* points) {
  points->clear();
  for (size_t pi = 0; pi < config.post_snapshot_ingest.size(); pi++) {
    const uint64_t post_bytes = config.post_snapshot_ingest[pi];
    StoreOptions opts = config.store;
    opts.data_dir = config.store.data_dir + "/point" + std::to_string(pi);
    opts.flash_dir = config.store.flash_dir + "/point" + std::to_string(pi);
    opts.durable_acks = true;
    Status s = ObjectStore::Create(opts);
    if (!s.ok()) return s;

    ShadowMap shadow;
    {
      std::unique_ptr<ObjectStore> store;
      s = ObjectStore::Open(opts, &store);
      if (!s.ok()) return s;
      WorkloadConfig wl = config.workload;
      wl.target_utilization = config.fill_fraction;
      const uint64_t capacity =
          EstimateEffectiveCapacity(opts, wl.size_model);
      WorkloadGenerator gen(wl, capacity);
      s = RunFillPhase(store.get(), &gen, &shadow, nullptr);
      if (!s.ok()) return s;
      s = store->CloseOpenWriters();
      if (!s.ok()) return s;
      s = store->TakeSnapshot();
      if (!s.ok()) return s;
      // Post-snapshot ingest, then a hard kill (no clean shutdown).
      uint64_t done = 0;
      std::mt19937_64 rng(config.workload.seed ^ (pi + 1));
      uint64_t payload_seed = 0xC0FFEE ^ (pi << 20);
      while (done < post_bytes) {
        const uint64_t size =
            std::min<uint64_t>(SampleSize(wl.size_model, rng),
                               post_bytes - done);
        WorkloadGenerator::Op op;
        op.kind = WorkloadGenerator::Op::Kind::kPut;
        op.id = RandomId(rng);
        op.size = size;
        op.payload_seed = payload_seed++;
        s = DoPut(store.get(), &shadow, op);
        if (!s.ok()) return s;
        done += size;
      }
      // Dropped without Close(): models the crash.
    }

    RecoveryBenchPoint point;
    point.post_snapshot_ingest = post_bytes;
    std::vector<double> times;
    for (uint32_t r = 0; r < config.repeats; r++) {
      std::vector<std::unique_ptr<Drive>> drives;
      DriveMap map;
      for (uint32_t id : Drive::ListDriveIds(opts.data_dir)) {
        DriveGeometry geom{id, opts.zone_count, opts.zone_capacity,
                           opts.block_size};
        std::unique_ptr<Drive> drive;
        s = Drive::Open(opts.data_dir, geom, &drive);
        if (!s.ok()) return s;
        map[id] = drive.get();
        drives.push_back(std::move(drive));
      }
      RecoveryOptions ropts;
      ropts.read_only = true;
      RecoveredState state;
      RecoveryReport report;
      const auto t0 = std::chrono::steady_clock::now();
      s = RecoverStore(map, opts.flash_dir, opts.MakeZoneSetConfig(), ropts,
                       &state, &report);
      const auto t1 = std::chrono::steady_clock::now();
      if (!s.ok()) return s;
      times.push_back(std::chrono::duration<double>(t1 - t0).count());
      point.sets_examined = report.zone_sets_examined;
    }
    std::sort(times.begin(), times.end());
    point.recovery_seconds = times[times.size() / 2];

    // Full recovery + equivalence check against the shadow.
    {
      std::unique_ptr<ObjectStore> store;
      RecoveryReport report;
      s = ObjectStore::Open(opts, &store, &report);
      if (!s.ok()) return s;
      s = VerifyStoreMatchesShadow(store.get(), shadow);
      if (!s.ok()) return s;
      s = store->Close();
      if (!s.ok()) return s;
    }
    points->push_back(point);
  }
  return Status::OK();
}

}  // namespace bench
}  // namespace zonestore
