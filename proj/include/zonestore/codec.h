// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "zonestore/status.h"

namespace zonestore {

struct CodecConfig {
  uint32_t data_shards = 0;    // k >= 1
  uint32_t parity_shards = 0;  // m; RAID-4 fixes m == 1

  uint32_t width() const { return data_shards + parity_shards; }
};

// A shard buffer, or nullopt for an erased/unavailable shard.
using ShardSet = std::vector<std::optional<std::vector<uint8_t>>>;

// Erasure coding behind an abstract interface so other codes can be added.
// All shards within one call have equal length; implementations are pure
// and safe for unrestricted concurrent use.
class ErasureCodec {
 public:
  virtual ~ErasureCodec() = default;

  virtual const CodecConfig& config() const = 0;

  // data holds k equal-length buffers; fills m parity buffers.
  virtual Status Encode(std::span<const std::span<const uint8_t>> data,
                        std::vector<std::vector<uint8_t>>* parity) const = 0;

  // shards has k+m slots with at most m missing; reconstructs the missing
  // ones in place, byte-identical to the originals.
  virtual Status Reconstruct(ShardSet* shards) const = 0;

  // All k+m shards present: true iff parity is consistent with the data.
  virtual Status Verify(std::span<const std::span<const uint8_t>> shards,
                        bool* consistent) const = 0;
};

// Dedicated-parity XOR code (k data + 1 parity); the parity shard lives at
// index k. Tolerates the loss of any single shard.
std::unique_ptr<ErasureCodec> MakeRaid4Codec(uint32_t data_shards);

}  // namespace zonestore
