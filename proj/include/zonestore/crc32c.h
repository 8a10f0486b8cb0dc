// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#pragma once

#include <cstddef>
#include <cstdint>

namespace zonestore {
namespace crc32c {

// CRC-32C (Castagnoli). All on-disk checksums use this function.
// Extend() continues a previous crc; Value() starts from zero state.
uint32_t Extend(uint32_t crc, const void* data, size_t n);

inline uint32_t Value(const void* data, size_t n) { return Extend(0, data, n); }

}  // namespace crc32c
}  // namespace zonestore
