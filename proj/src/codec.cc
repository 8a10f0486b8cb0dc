// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/codec.h"

#include <cstring>

namespace zonestore {

namespace {

void XorInto(uint8_t* dst, const uint8_t* src, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    uint64_t a, b;
    memcpy(&a, dst + i, 8);
    memcpy(&b, src + i, 8);
    a ^= b;
    memcpy(dst + i, &a, 8);
  }
  for (; i < n; i++) dst[i] ^= src[i];
}

class Raid4Codec final : public ErasureCodec {
 public:
  explicit Raid4Codec(uint32_t data_shards)
      : config_{data_shards, /*parity_shards=*/1} {}

  const CodecConfig& config() const override { return config_; }

  Status Encode(std::span<const std::span<const uint8_t>> data,
                std::vector<std::vector<uint8_t>>* parity) const override {
    if (data.size() != config_.data_shards)
      return Status::InvalidArgument("wrong data shard count");
    const size_t len = data.empty() ? 0 : data[0].size();
    for (const auto& shard : data)
      if (shard.size() != len)
        return Status::UnequalShardLengths("data shards differ in length");
    parity->assign(1, std::vector<uint8_t>(len, 0));
    for (const auto& shard : data)
      XorInto((*parity)[0].data(), shard.data(), len);
    return Status::OK();
  }

  Status Reconstruct(ShardSet* shards) const override {
    if (shards->size() != config_.width())
      return Status::InvalidArgument("wrong shard count");
    size_t missing = 0;
    size_t missing_idx = 0;
    size_t len = 0;
    bool have_len = false;
    for (size_t i = 0; i < shards->size(); i++) {
      const auto& shard = (*shards)[i];
      if (!shard.has_value()) {
        missing++;
        missing_idx = i;
        continue;
      }
      if (!have_len) {
        len = shard->size();
        have_len = true;
      } else if (shard->size() != len) {
        return Status::UnequalShardLengths("present shards differ in length");
      }
    }
    if (missing > config_.parity_shards)
      return Status::TooManyMissing(std::to_string(missing) +
                                    " shards missing");
    if (missing == 0) return Status::OK();
    std::vector<uint8_t> rebuilt(len, 0);
    for (size_t i = 0; i < shards->size(); i++) {
      if (i == missing_idx) continue;
      XorInto(rebuilt.data(), (*shards)[i]->data(), len);
    }
    (*shards)[missing_idx] = std::move(rebuilt);
    return Status::OK();
  }

  Status Verify(std::span<const std::span<const uint8_t>> shards,
                bool* consistent) const override {
    if (shards.size() != config_.width())
      return Status::InvalidArgument("wrong shard count");
    const size_t len = shards[0].size();
    for (const auto& shard : shards)
      if (shard.size() != len)
        return Status::UnequalShardLengths("shards differ in length");
    std::vector<uint8_t> acc(len, 0);
    for (const auto& shard : shards) XorInto(acc.data(), shard.data(), len);
    *consistent = true;
    for (uint8_t b : acc) {
      if (b != 0) {
        *consistent = false;
        break;
      }
    }
    return Status::OK();
  }

 private:
  CodecConfig config_;
};

}  // namespace

std::unique_ptr<ErasureCodec> MakeRaid4Codec(uint32_t data_shards) {
  return std::make_unique<Raid4Codec>(data_shards);
}

}  // namespace zonestore
