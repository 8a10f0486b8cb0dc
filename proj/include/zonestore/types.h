// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>

namespace zonestore {

// Object identifiers are opaque 256-bit values, compared bytewise.
struct ObjectId {
  std::array<uint8_t, 32> bytes{};

  auto operator<=>(const ObjectId&) const = default;

  std::string ToHex() const;
  static std::optional<ObjectId> FromHex(const std::string& hex);
};

// Version timestamps and entry timestamps come from one store-wide
// monotonic logical clock (microsecond-style units, bumped on ties).
using Timestamp = uint64_t;

inline uint64_t AlignUp(uint64_t v, uint64_t a) { return (v + a - 1) / a * a; }
inline uint64_t AlignDown(uint64_t v, uint64_t a) { return v / a * a; }

// Device bytes one striped segment occupies across a whole zone set:
// per zone, one marker block plus the block-padded fragment.
struct SegmentShape {
  uint64_t fragment_payload;  // ceil(segment_length / data_shards)
  uint64_t fragment_stored;   // fragment_payload padded to block multiple
  uint64_t per_zone;          // block_size + fragment_stored
  uint64_t total;             // per_zone * width
};

inline SegmentShape ShapeSegment(uint64_t segment_length, uint32_t width,
                                 uint32_t block_size) {
  SegmentShape s;
  const uint32_t k = width - 1;
  s.fragment_payload = (segment_length + k - 1) / k;
  s.fragment_stored = AlignUp(s.fragment_payload, block_size);
  s.per_zone = block_size + s.fragment_stored;
  s.total = s.per_zone * width;
  return s;
}

}  // namespace zonestore
