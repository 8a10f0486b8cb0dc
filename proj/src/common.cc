// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/status.h"
#include "zonestore/types.h"

namespace zonestore {

const char* Status::CodeName(Code c) {
  switch (c) {
    case Code::kOk: return "OK";
    case Code::kIOError: return "IOError";
    case Code::kInvalidArgument: return "InvalidArgument";
    case Code::kGeometryMismatch: return "GeometryMismatch";
    case Code::kZoneFull: return "ZoneFull";
    case Code::kMisaligned: return "Misaligned";
    case Code::kCrashInjected: return "CrashInjected";
    case Code::kReadPastWritePointer: return "ReadPastWritePointer";
    case Code::kDriveFailed: return "DriveFailed";
    case Code::kBusy: return "Busy";
    case Code::kBadMagic: return "BadMagic";
    case Code::kBadChecksum: return "BadChecksum";
    case Code::kUnknownVersion: return "UnknownVersion";
    case Code::kTruncatedRecord: return "TruncatedRecord";
    case Code::kUnequalShardLengths: return "UnequalShardLengths";
    case Code::kTooManyMissing: return "TooManyMissing";
    case Code::kInsufficientZones: return "InsufficientZones";
    case Code::kOutOfSpace: return "OutOfSpace";
    case Code::kBadState: return "BadState";
    case Code::kSegmentTooLarge: return "SegmentTooLarge";
    case Code::kDonorConflict: return "DonorConflict";
    case Code::kDonorNotEmpty: return "DonorNotEmpty";
    case Code::kDonorExhausted: return "DonorExhausted";
    case Code::kNotFound: return "NotFound";
    case Code::kReadError: return "ReadError";
    case Code::kSnapshotCorrupt: return "SnapshotCorrupt";
    case Code::kSnapshotIncomplete: return "SnapshotIncomplete";
    case Code::kNoSuperblock: return "NoSuperblock";
    case Code::kUnrecoverableSnapshot: return "UnrecoverableSnapshot";
    case Code::kCorruption: return "Corruption";
  }
  return "Unknown";
}

std::string ObjectId::ToHex() const {
  static const char* kHex = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (uint8_t b : bytes) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 0xF]);
  }
  return s;
}

std::optional<ObjectId> ObjectId::FromHex(const std::string& hex) {
  if (hex.size() != 64) return std::nullopt;
  ObjectId id;
  for (size_t i = 0; i < 32; i++) {
    int hi = -1, lo = -1;
    char a = hex[2 * i], b = hex[2 * i + 1];
    if (a >= '0' && a <= '9') hi = a - '0';
    else if (a >= 'a' && a <= 'f') hi = a - 'a' + 10;
    else if (a >= 'A' && a <= 'F') hi = a - 'A' + 10;
    if (b >= '0' && b <= '9') lo = b - '0';
    else if (b >= 'a' && b <= 'f') lo = b - 'a' + 10;
    else if (b >= 'A' && b <= 'F') lo = b - 'A' + 10;
    if (hi < 0 || lo < 0) return std::nullopt;
    id.bytes[i] = static_cast<uint8_t>(hi << 4 | lo);
  }
  return id;
}

}  // namespace zonestore
