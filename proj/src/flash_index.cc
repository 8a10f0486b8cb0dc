// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/flash_index.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace zonestore {

namespace fs = std::filesystem;

namespace {

Status WriteFileAtomic(const std::string& path,
                       std::span<const uint8_t> data) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return Status::IOError("cannot create " + tmp);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) return Status::IOError("short write to " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) return Status::IOError("rename failed: " + ec.message());
  return Status::OK();
}

Status ReadFile(const std::string& path, std::vector<uint8_t>* out) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) return Status::NotFound("missing " + path);
  const std::streamsize size = in.tellg();
  in.seekg(0);
  out->resize(static_cast<size_t>(size));
  in.read(reinterpret_cast<char*>(out->data()), size);
  if (!in) return Status::IOError("short read from " + path);
  return Status::OK();
}

}  // namespace

FlashIndexStore::FlashIndexStore(std::string flash_dir)
    : dir_(std::move(flash_dir)) {}

std::string FlashIndexStore::SnapshotPath(uint64_t snapshot_id) const {
  return dir_ + "/index/snapshot-" + std::to_string(snapshot_id) + ".dat";
}

Status FlashIndexStore::WriteRuns(
    const OperationalIndex& index, uint64_t sb_sequence,
    const std::map<uint32_t, uint64_t>& dead_bytes) {
  std::error_code ec;
  fs::create_directories(dir_ + "/index/current", ec);
  if (ec) return Status::IOError(ec.message());
  std::vector<uint8_t> image;
  Status s = SerializeIndex(index, /*snapshot_id=*/0, /*created_at=*/0, &image);
  if (!s.ok()) return s;
  const std::string run_name = "run-000001.dat";
  s = WriteFileAtomic(dir_ + "/index/current/" + run_name, image);
  if (!s.ok()) return s;
  std::ostringstream manifest;
  manifest << "format=1\n"
           << "sequence=" << sb_sequence << "\n"
           << "run=" << run_name << "\n"
           << "entries=" << index.size() << "\n";
  for (const auto& [set_id, dead] : dead_bytes)
    if (dead > 0) manifest << "dead." << set_id << "=" << dead << "\n";
  const std::string text = manifest.str();
  return WriteFileAtomic(
      dir_ + "/index/current/manifest",
      std::span<const uint8_t>(
          reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

Status FlashIndexStore::LoadRuns(OperationalIndex* index,
                                 uint64_t* sb_sequence,
                                 std::map<uint32_t, uint64_t>* dead_bytes) {
  std::vector<uint8_t> manifest_bytes;
  Status s = ReadFile(dir_ + "/index/current/manifest", &manifest_bytes);
  if (!s.ok()) return s;
  std::istringstream in(
      std::string(manifest_bytes.begin(), manifest_bytes.end()));
  std::string line, run_name;
  uint64_t sequence = 0;
  bool have_seq = false;
  while (std::getline(in, line)) {
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "sequence") {
      sequence = std::stoull(value);
      have_seq = true;
    } else if (key == "run") {
      run_name = value;
    } else if (key.rfind("dead.", 0) == 0 && dead_bytes != nullptr) {
      (*dead_bytes)[static_cast<uint32_t>(std::stoul(key.substr(5)))] =
          std::stoull(value);
    }
  }
  if (!have_seq || run_name.empty())
    return Status::SnapshotCorrupt("flash manifest incomplete");
  std::vector<uint8_t> image;
  s = ReadFile(dir_ + "/index/current/" + run_name, &image);
  if (!s.ok()) return s;
  s = DeserializeIndex(image, index, nullptr, nullptr);
  if (!s.ok()) return s;
  if (sb_sequence) *sb_sequence = sequence;
  return Status::OK();
}

Status FlashIndexStore::WriteSnapshotFile(uint64_t snapshot_id,
                                          std::span<const uint8_t> image) {
  std::error_code ec;
  fs::create_directories(dir_ + "/index", ec);
  if (ec) return Status::IOError(ec.message());
  return WriteFileAtomic(SnapshotPath(snapshot_id), image);
}

Status FlashIndexStore::ReadSnapshotFile(uint64_t snapshot_id,
                                         std::vector<uint8_t>* image) {
  return ReadFile(SnapshotPath(snapshot_id), image);
}

void FlashIndexStore::PruneSnapshots(const std::vector<uint64_t>& keep) {
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir_ + "/index", ec)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("snapshot-", 0) != 0) continue;
    const std::string num = name.substr(9, name.size() - 9 - 4);
    bool keep_this = false;
    for (uint64_t id : keep)
      if (num == std::to_string(id)) keep_this = true;
    if (!keep_this) fs::remove(entry.path(), ec);
  }
}

}  // namespace zonestore
