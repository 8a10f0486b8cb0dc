// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/gc.h"

#include <algorithm>

namespace zonestore {

std::optional<uint32_t> SelectGreedyVictim(
    const std::vector<ZoneSetInfo>& table) {
  std::optional<uint32_t> best;
  uint64_t best_dead = 0;
  for (const ZoneSetInfo& info : table) {
    if (info.state != ZoneSetState::kClosed &&
        info.state != ZoneSetState::kIndexed)
      continue;
    if (info.dead_bytes == 0) continue;
    if (!best || info.dead_bytes > best_dead ||
        (info.dead_bytes == best_dead && info.zoneset_id < *best)) {
      best = info.zoneset_id;
      best_dead = info.dead_bytes;
    }
  }
  return best;
}

GreedyCollector::GreedyCollector(Context ctx, GcPolicy policy)
    : ctx_(std::move(ctx)), policy_(policy) {}

GreedyCollector::~GreedyCollector() { Stop(); }

std::optional<uint32_t> GreedyCollector::SelectVictim() const {
  std::vector<ZoneSetInfo> table = ctx_.mgr->SnapshotTable();
  // The destination set is OPEN, so it can never select itself.
  return SelectGreedyVictim(table);
}

Status GreedyCollector::EnsureDestination(uint64_t needed_per_zone) {
  if (writer_ && !writer_->closed()) {
    const uint64_t bs = ctx_.mgr->config().block_size;
    const uint64_t cap = ctx_.mgr->config().zone_capacity;
    const uint64_t reserve =
        static_cast<uint64_t>(
            DigestBlocks(writer_->pending_entries() + 1, bs)) *
        bs;
    const uint64_t used = writer_->write_offset();
    const uint64_t room = cap > used + reserve ? cap - used - reserve : 0;
    if (room >= needed_per_zone) return Status::OK();
    Status s = writer_->Close();
    if (!s.ok()) return s;
    writer_.reset();
  }
  if (!writer_)
    return ctx_.mgr->OpenZoneSet(OpenPurpose::kGarbageCollection, &writer_);
  return Status::OK();
}

Status GreedyCollector::CloseDestination() {
  std::lock_guard<std::mutex> lk(clean_mu_);
  if (writer_ && !writer_->closed()) {
    Status s = writer_->Close();
    writer_.reset();
    return s;
  }
  writer_.reset();
  return Status::OK();
}

Status GreedyCollector::CleanZoneSet(uint32_t victim_id,
                                     uint64_t* reclaimed_bytes,
                                     bool caller_holds_gate) {
  std::lock_guard<std::mutex> lk(clean_mu_);
  if (reclaimed_bytes) *reclaimed_bytes = 0;
  const uint32_t bs = ctx_.mgr->config().block_size;
  const uint32_t width = ctx_.mgr->config().width;

  ZoneSetInfo info = ctx_.mgr->GetInfo(victim_id);
  if (info.state != ZoneSetState::kClosed &&
      info.state != ZoneSetState::kIndexed)
    return Status::BadState("victim must be CLOSED or INDEXED");

  ZoneSetDigest digest;
  {
    std::shared_lock<std::shared_mutex> set_lk(ctx_.mgr->SetLock(victim_id));
    Status s = ctx_.mgr->ReadDigest(victim_id, &digest);
    if (!s.ok()) return s;
  }

  // Live segments, relocated in key order so an object's segments stay
  // together; tombstones newer than the last snapshot are carried forward.
  struct LiveSegment {
    DigestEntry entry;
    IndexKey key;
    IndexValue value;
  };
  std::vector<LiveSegment> live;
  std::vector<DigestEntry> carry_tombstones;
  const Timestamp snapshot_time =
      ctx_.last_snapshot_time ? ctx_.last_snapshot_time() : 0;
  uint64_t needed_per_zone = 0;
  for (const DigestEntry& e : digest.entries) {
    if (e.record_type == RecordType::kTombstone) {
      if (e.entry_timestamp > snapshot_time) {
        carry_tombstones.push_back(e);
        needed_per_zone += bs;
      }
      continue;
    }
    IndexKey key;
    key.object_id = e.object_id;
    key.version = e.version;
    key.segment_id = e.segment_id;
    key.complete = e.complete;
    IndexValue value;
    if (!ctx_.index->Get(key, &value)) continue;
    if (value.zoneset_id != victim_id || value.offset != e.offset ||
        value.entry_timestamp != e.entry_timestamp)
      continue;  // stale copy; the live one lives elsewhere
    live.push_back({e, key, value});
    needed_per_zone += bs + ShapeSegment(e.segment_length, width, bs)
                                .fragment_stored;
  }
  std::sort(live.begin(), live.end(),
            [](const LiveSegment& a, const LiveSegment& b) {
              return a.key < b.key;
            });

  Status s = EnsureDestination(needed_per_zone);
  if (!s.ok()) return s;

  for (const LiveSegment& seg : live) {
    std::shared_lock<std::shared_mutex> gate;
    if (!caller_holds_gate && ctx_.mutation_gate)
      gate = std::shared_lock<std::shared_mutex>(*ctx_.mutation_gate);

    // Re-check liveness: a concurrent delete or overwrite wins.
    IndexValue current;
    if (!ctx_.index->Get(seg.key, &current) || !(current == seg.value))
      continue;

    LayoutMarkerBlock expected;
    expected.record_type = RecordType::kSegment;
    expected.object_id = seg.key.object_id;
    expected.version = seg.key.version;
    expected.segment_id = seg.key.segment_id;
    expected.complete = seg.key.complete;
    expected.segment_length = seg.value.length;
    expected.entry_timestamp = seg.value.entry_timestamp;
    std::vector<uint8_t> payload;
    bool degraded = false;
    {
      std::shared_lock<std::shared_mutex> set_lk(
          ctx_.mgr->SetLock(victim_id));
      s = ctx_.mgr->ReadSegment(victim_id, seg.value.offset, expected,
                                &payload, &degraded);
    }
    if (!s.ok()) return s;

    SegmentMeta meta;
    meta.object_id = seg.key.object_id;
    meta.version = seg.key.version;
    meta.segment_id = seg.key.segment_id;
    meta.complete = seg.key.complete;
    meta.entry_timestamp = ctx_.clock->Next();
    AppendResult res;
    s = writer_->AppendSegment(meta, payload, &res);
    if (s.IsSegmentTooLarge()) {
      s = EnsureDestination(ctx_.mgr->config().zone_capacity);
      if (s.ok()) s = writer_->AppendSegment(meta, payload, &res);
    }
    if (!s.ok()) return s;

    const uint64_t consumption =
        ShapeSegment(seg.value.length, width, bs).total;
    IndexValue next;
    next.zoneset_id = res.zoneset_id;
    next.offset = res.offset;
    next.length = seg.value.length;
    next.entry_timestamp = meta.entry_timestamp;
    if (ctx_.index->UpdateIfEqual(seg.key, seg.value, next)) {
      ctx_.mgr->AddDeadBytes(victim_id, consumption);
    } else {
      // Deleted or overwritten while relocating: the fresh copy is garbage.
      ctx_.mgr->AddDeadBytes(res.zoneset_id, consumption);
    }
    if (ctx_.metrics) ctx_.metrics->bytes_relocated.fetch_add(consumption);
  }

  for (const DigestEntry& t : carry_tombstones) {
    std::shared_lock<std::shared_mutex> gate;
    if (!caller_holds_gate && ctx_.mutation_gate)
      gate = std::shared_lock<std::shared_mutex>(*ctx_.mutation_gate);
    AppendResult res;
    s = writer_->AppendTombstone(t.object_id, t.version, ctx_.clock->Next(),
                                 &res);
    if (s.IsSegmentTooLarge()) {
      s = EnsureDestination(ctx_.mgr->config().zone_capacity);
      if (s.ok())
        s = writer_->AppendTombstone(t.object_id, t.version,
                                     ctx_.clock->Next(), &res);
    }
    if (!s.ok()) return s;
  }

  {
    std::shared_lock<std::shared_mutex> gate;
    if (!caller_holds_gate && ctx_.mutation_gate)
      gate = std::shared_lock<std::shared_mutex>(*ctx_.mutation_gate);
    info = ctx_.mgr->GetInfo(victim_id);
    const uint64_t reclaimed = info.write_offset * width;
    s = ctx_.mgr->TrimZoneSet(victim_id);
    if (!s.ok()) return s;
    if (reclaimed_bytes) *reclaimed_bytes = reclaimed;
    if (ctx_.metrics) {
      ctx_.metrics->bytes_reclaimed.fetch_add(reclaimed);
      ctx_.metrics->cleans_completed.fetch_add(1);
    }
  }
  return Status::OK();
}

Status GreedyCollector::EnsureFreeSets(uint32_t want, bool caller_holds_gate) {
  const size_t max_rounds = ctx_.mgr->set_count() * 2 + 4;
  bool closed_destination = false;
  for (size_t round = 0; round < max_rounds; round++) {
    if (ctx_.mgr->FreeSets() >= want) return Status::OK();
    auto victim = SelectVictim();
    if (!victim && !closed_destination) {
      // Dead bytes may be trapped in the open destination set; close it so
      // it becomes a candidate.
      closed_destination = true;
      Status s = CloseDestination();
      if (!s.ok()) return s;
      victim = SelectVictim();
    }
    if (!victim)
      return Status::OutOfSpace("no cleanable zone set has dead bytes");
    uint64_t reclaimed = 0;
    Status s = CleanZoneSet(*victim, &reclaimed, caller_holds_gate);
    if (!s.ok()) return s;
  }
  return Status::OutOfSpace("cleaning did not reach the free-set goal");
}

void GreedyCollector::Start() {
  std::lock_guard<std::mutex> lk(bg_mu_);
  if (thread_.joinable()) return;
  stop_ = false;
  thread_ = std::thread([this] { BackgroundLoop(); });
}

void GreedyCollector::Stop() {
  {
    std::lock_guard<std::mutex> lk(bg_mu_);
    stop_ = true;
  }
  bg_cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

void GreedyCollector::Poke() {
  {
    std::lock_guard<std::mutex> lk(bg_mu_);
    poked_ = true;
  }
  bg_cv_.notify_all();
}

void GreedyCollector::BackgroundLoop() {
  while (true) {
    {
      std::unique_lock<std::mutex> lk(bg_mu_);
      bg_cv_.wait_for(lk, std::chrono::milliseconds(policy_.idle_interval_ms),
                      [this] { return stop_ || poked_; });
      if (stop_) return;
      poked_ = false;
    }
    if (ctx_.mgr->FreeSets() < policy_.low_watermark) {
      EnsureFreeSets(policy_.low_watermark, /*caller_holds_gate=*/false);
      continue;
    }
    // Idle pass: only reclaim sets that are nearly all dead, which frees
    // space without inflating write amplification.
    std::vector<ZoneSetInfo> table = ctx_.mgr->SnapshotTable();
    for (const ZoneSetInfo& info : table) {
      if (info.state != ZoneSetState::kClosed &&
          info.state != ZoneSetState::kIndexed)
        continue;
      const uint64_t content =
          info.write_offset * ctx_.mgr->config().width;
      if (content == 0 || info.dead_bytes == 0) continue;
      if (static_cast<double>(info.dead_bytes) >=
          policy_.idle_min_dead_fraction * static_cast<double>(content)) {
        uint64_t reclaimed = 0;
        CleanZoneSet(info.zoneset_id, &reclaimed, false);
        break;  // one per tick
      }
    }
  }
}

}  // namespace zonestore
