// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#pragma once

#include <string>
#include <utility>

namespace zonestore {

// Status is the error idiom used across the library: operations return a
// Status and produce results through out-parameters. Subcodes are specific
// enough that callers can branch on them (ZoneFull vs Misaligned etc.)
// without parsing messages.
class Status {
 public:
  enum class Code : unsigned char {
    kOk = 0,
    kIOError,
    kInvalidArgument,
    kGeometryMismatch,
    kZoneFull,
    kMisaligned,
    kCrashInjected,
    kReadPastWritePointer,
    kDriveFailed,
    kBusy,
    kBadMagic,
    kBadChecksum,
    kUnknownVersion,
    kTruncatedRecord,
    kUnequalShardLengths,
    kTooManyMissing,
    kInsufficientZones,
    kOutOfSpace,
    kBadState,
    kSegmentTooLarge,
    kDonorConflict,
    kDonorNotEmpty,
    kDonorExhausted,
    kNotFound,
    kReadError,
    kSnapshotCorrupt,
    kSnapshotIncomplete,
    kNoSuperblock,
    kUnrecoverableSnapshot,
    kCorruption,
  };

  Status() = default;

  static Status OK() { return Status(); }

#define ZONESTORE_STATUS_CTOR(name)                      \
  static Status name(std::string msg = "") {            \
    return Status(Code::k##name, std::move(msg));       \
  }                                                      \
  bool Is##name() const { return code_ == Code::k##name; }

  ZONESTORE_STATUS_CTOR(IOError)
  ZONESTORE_STATUS_CTOR(InvalidArgument)
  ZONESTORE_STATUS_CTOR(GeometryMismatch)
  ZONESTORE_STATUS_CTOR(ZoneFull)
  ZONESTORE_STATUS_CTOR(Misaligned)
  ZONESTORE_STATUS_CTOR(CrashInjected)
  ZONESTORE_STATUS_CTOR(ReadPastWritePointer)
  ZONESTORE_STATUS_CTOR(DriveFailed)
  ZONESTORE_STATUS_CTOR(Busy)
  ZONESTORE_STATUS_CTOR(BadMagic)
  ZONESTORE_STATUS_CTOR(BadChecksum)
  ZONESTORE_STATUS_CTOR(UnknownVersion)
  ZONESTORE_STATUS_CTOR(TruncatedRecord)
  ZONESTORE_STATUS_CTOR(UnequalShardLengths)
  ZONESTORE_STATUS_CTOR(TooManyMissing)
  ZONESTORE_STATUS_CTOR(InsufficientZones)
  ZONESTORE_STATUS_CTOR(OutOfSpace)
  ZONESTORE_STATUS_CTOR(BadState)
  ZONESTORE_STATUS_CTOR(SegmentTooLarge)
  ZONESTORE_STATUS_CTOR(DonorConflict)
  ZONESTORE_STATUS_CTOR(DonorNotEmpty)
  ZONESTORE_STATUS_CTOR(DonorExhausted)
  ZONESTORE_STATUS_CTOR(NotFound)
  ZONESTORE_STATUS_CTOR(ReadError)
  ZONESTORE_STATUS_CTOR(SnapshotCorrupt)
  ZONESTORE_STATUS_CTOR(SnapshotIncomplete)
  ZONESTORE_STATUS_CTOR(NoSuperblock)
  ZONESTORE_STATUS_CTOR(UnrecoverableSnapshot)
  ZONESTORE_STATUS_CTOR(Corruption)

#undef ZONESTORE_STATUS_CTOR

  bool ok() const { return code_ == Code::kOk; }
  Code code() const { return code_; }
  const std::string& message() const { return msg_; }

  std::string ToString() const {
    if (ok()) return "OK";
    std::string s = CodeName(code_);
    if (!msg_.empty()) {
      s += ": ";
      s += msg_;
    }
    return s;
  }

  static const char* CodeName(Code c);

 private:
  Status(Code code, std::string msg) : code_(code), msg_(std::move(msg)) {}

  Code code_ = Code::kOk;
  std::string msg_;
};

}  // namespace zonestore
