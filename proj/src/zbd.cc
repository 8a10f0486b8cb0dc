// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include "zonestore/zbd.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>

#include "zonestore/crc32c.h"

namespace zonestore {

namespace {

constexpr char kStateMagic[4] = {'Z', 'B', 'D', 'S'};
constexpr uint32_t kStateVersion = 1;

void PutU32(std::vector<uint8_t>* buf, uint32_t v) {
  for (int i = 0; i < 4; i++) buf->push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void PutU64(std::vector<uint8_t>* buf, uint64_t v) {
  for (int i = 0; i < 8; i++) buf->push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t GetU32(const uint8_t* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; i++) v |= static_cast<uint32_t>(p[i]) << (8 * i);
  return v;
}

uint64_t GetU64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; i++) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

Status ReadWholeFile(int fd, std::vector<uint8_t>* out) {
  struct stat st;
  if (fstat(fd, &st) != 0) return Status::IOError(strerror(errno));
  out->resize(static_cast<size_t>(st.st_size));
  size_t off = 0;
  while (off < out->size()) {
    ssize_t n = pread(fd, out->data() + off, out->size() - off, off);
    if (n < 0) return Status::IOError(strerror(errno));
    if (n == 0) break;
    off += static_cast<size_t>(n);
  }
  return Status::OK();
}

// RAII guard for the per-zone append-exclusion flag.
class BusyGuard {
 public:
  BusyGuard(std::atomic<bool>* flag, bool acquired)
      : flag_(flag), acquired_(acquired) {}
  ~BusyGuard() {
    if (acquired_) flag_->store(false, std::memory_order_release);
  }
  bool acquired() const { return acquired_; }

 private:
  std::atomic<bool>* flag_;
  bool acquired_;
};

}  // namespace

std::string Drive::DataPath(const std::string& dir, uint32_t drive_id) {
  return dir + "/drive" + std::to_string(drive_id) + ".dat";
}

std::string Drive::StatePath(const std::string& dir, uint32_t drive_id) {
  return dir + "/drive" + std::to_string(drive_id) + ".state";
}

std::vector<uint32_t> Drive::ListDriveIds(const std::string& dir) {
  std::vector<uint32_t> ids;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("drive", 0) != 0) continue;
    const size_t dot = name.find(".state");
    if (dot == std::string::npos) continue;
    const std::string num = name.substr(5, dot - 5);
    if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos)
      continue;
    ids.push_back(static_cast<uint32_t>(std::stoul(num)));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

Drive::Drive(DriveGeometry geom, std::string dir)
    : geom_(geom),
      dir_(std::move(dir)),
      wps_(geom.zone_count),
      zone_busy_(geom.zone_count) {
  for (auto& wp : wps_) wp.store(0, std::memory_order_relaxed);
  for (auto& b : zone_busy_) b.store(false, std::memory_order_relaxed);
}

Status Drive::Open(const std::string& dir, const DriveGeometry& geometry,
                   std::unique_ptr<Drive>* out) {
  if (!geometry.Valid()) return Status::InvalidArgument("bad drive geometry");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);

  auto drive = std::unique_ptr<Drive>(new Drive(geometry, dir));
  const std::string data_path = DataPath(dir, geometry.drive_id);
  const std::string state_path = StatePath(dir, geometry.drive_id);
  const uint64_t data_size =
      static_cast<uint64_t>(geometry.zone_count) * geometry.zone_capacity;

  const bool state_exists = std::filesystem::exists(state_path);
  const bool data_exists = std::filesystem::exists(data_path);
  if (state_exists != data_exists)
    return Status::IOError("drive backing files are incomplete: " + data_path);

  drive->data_fd_ = open(data_path.c_str(), O_RDWR | O_CREAT, 0644);
  if (drive->data_fd_ < 0) return Status::IOError(strerror(errno));
  drive->state_fd_ = open(state_path.c_str(), O_RDWR | O_CREAT, 0644);
  if (drive->state_fd_ < 0) return Status::IOError(strerror(errno));

  if (state_exists) {
    struct stat st;
    if (fstat(drive->data_fd_, &st) != 0)
      return Status::IOError(strerror(errno));
    if (static_cast<uint64_t>(st.st_size) != data_size)
      return Status::GeometryMismatch("data file size mismatch for " +
                                      data_path);
    std::vector<uint8_t> buf;
    Status s = ReadWholeFile(drive->state_fd_, &buf);
    if (!s.ok()) return s;
    const size_t expect = 4 + 4 + 4 + 8ull * geometry.zone_count + 4;
    if (buf.size() < 16 || memcmp(buf.data(), kStateMagic, 4) != 0)
      return Status::GeometryMismatch("bad state file magic: " + state_path);
    if (GetU32(buf.data() + 4) != kStateVersion)
      return Status::UnknownVersion("state file version");
    const uint32_t zone_count = GetU32(buf.data() + 8);
    if (zone_count != geometry.zone_count || buf.size() != expect)
      return Status::GeometryMismatch("zone count mismatch for " + state_path);
    const uint32_t stored_crc = GetU32(buf.data() + buf.size() - 4);
    if (crc32c::Value(buf.data(), buf.size() - 4) != stored_crc)
      return Status::BadChecksum("state file checksum: " + state_path);
    for (uint32_t i = 0; i < zone_count; i++) {
      const uint64_t wp = GetU64(buf.data() + 12 + 8ull * i);
      if (wp > geometry.zone_capacity || wp % geometry.block_size != 0)
        return Status::GeometryMismatch("write pointer out of range");
      drive->wps_[i].store(wp, std::memory_order_relaxed);
    }
  } else {
    if (ftruncate(drive->data_fd_, static_cast<off_t>(data_size)) != 0)
      return Status::IOError(strerror(errno));
    Status s = drive->PersistState();
    if (!s.ok()) return s;
  }

  *out = std::move(drive);
  return Status::OK();
}

Drive::~Drive() {
  // No persistence here: an unclean teardown models a crash, and the state
  // file already reflects every completed append.
  if (data_fd_ >= 0) close(data_fd_);
  if (state_fd_ >= 0) close(state_fd_);
}

Status Drive::PersistState() {
  std::vector<uint8_t> buf;
  buf.reserve(16 + 8ull * geom_.zone_count);
  buf.insert(buf.end(), kStateMagic, kStateMagic + 4);
  PutU32(&buf, kStateVersion);
  PutU32(&buf, geom_.zone_count);
  for (uint32_t i = 0; i < geom_.zone_count; i++)
    PutU64(&buf, wps_[i].load(std::memory_order_relaxed));
  PutU32(&buf, crc32c::Value(buf.data(), buf.size()));
  ssize_t n = pwrite(state_fd_, buf.data(), buf.size(), 0);
  if (n != static_cast<ssize_t>(buf.size()))
    return Status::IOError("state file write failed");
  return Status::OK();
}

Status Drive::CheckOperable(uint32_t zone_id) const {
  if (failed()) return Status::DriveFailed("drive " + std::to_string(geom_.drive_id));
  if (crashed()) return Status::CrashInjected();
  if (zone_id >= geom_.zone_count)
    return Status::InvalidArgument("zone id out of range");
  return Status::OK();
}

Status Drive::Append(uint32_t zone_id, std::span<const uint8_t> data,
                     uint64_t* offset_out) {
  Status s = CheckOperable(zone_id);
  if (!s.ok()) return s;
  if (data.empty()) return Status::InvalidArgument("empty append");
  if (data.size() % geom_.block_size != 0)
    return Status::Misaligned("append length not a block multiple");

  bool expected = false;
  BusyGuard busy(&zone_busy_[zone_id],
                 zone_busy_[zone_id].compare_exchange_strong(expected, true));
  if (!busy.acquired())
    return Status::Busy("concurrent append to zone " + std::to_string(zone_id));

  const uint64_t wp = wps_[zone_id].load(std::memory_order_acquire);
  if (wp + data.size() > geom_.zone_capacity)
    return Status::ZoneFull("zone " + std::to_string(zone_id));

  uint64_t durable = data.size();
  if (injector_) durable = injector_->Admit(data.size(), geom_.block_size);

  if (durable > 0) {
    const off_t file_off =
        static_cast<off_t>(zone_id) * static_cast<off_t>(geom_.zone_capacity) +
        static_cast<off_t>(wp);
    size_t written = 0;
    while (written < durable) {
      ssize_t n = pwrite(data_fd_, data.data() + written, durable - written,
                         file_off + static_cast<off_t>(written));
      if (n <= 0) return Status::IOError(strerror(errno));
      written += static_cast<size_t>(n);
    }
    wps_[zone_id].store(wp + durable, std::memory_order_release);
    bytes_appended_.fetch_add(durable, std::memory_order_relaxed);
    std::lock_guard<std::mutex> lk(state_mu_);
    s = PersistState();
    if (!s.ok()) return s;
  }

  if (durable < data.size()) return Status::CrashInjected();
  *offset_out = wp;
  return Status::OK();
}

Status Drive::Read(uint32_t zone_id, uint64_t offset,
                   std::span<uint8_t> out) const {
  Status s = CheckOperable(zone_id);
  if (!s.ok()) return s;
  if (offset % geom_.block_size != 0 || out.size() % geom_.block_size != 0)
    return Status::Misaligned("read not block-aligned");
  const uint64_t wp = wps_[zone_id].load(std::memory_order_acquire);
  if (offset + out.size() > wp)
    return Status::ReadPastWritePointer(
        "read beyond write pointer of zone " + std::to_string(zone_id));
  const off_t file_off =
      static_cast<off_t>(zone_id) * static_cast<off_t>(geom_.zone_capacity) +
      static_cast<off_t>(offset);
  size_t got = 0;
  while (got < out.size()) {
    ssize_t n = pread(data_fd_, out.data() + got, out.size() - got,
                      file_off + static_cast<off_t>(got));
    if (n < 0) return Status::IOError(strerror(errno));
    if (n == 0) {
      memset(out.data() + got, 0, out.size() - got);
      break;
    }
    got += static_cast<size_t>(n);
  }
  return Status::OK();
}

Status Drive::ResetZone(uint32_t zone_id) {
  Status s = CheckOperable(zone_id);
  if (!s.ok()) return s;
  bool expected = false;
  BusyGuard busy(&zone_busy_[zone_id],
                 zone_busy_[zone_id].compare_exchange_strong(expected, true));
  if (!busy.acquired())
    return Status::Busy("reset racing an append on zone " +
                        std::to_string(zone_id));
  wps_[zone_id].store(0, std::memory_order_release);
#ifdef FALLOC_FL_PUNCH_HOLE
  // Keeps backing files sparse across trim/reuse cycles; best effort.
  fallocate(data_fd_, FALLOC_FL_PUNCH_HOLE | FALLOC_FL_KEEP_SIZE,
            static_cast<off_t>(zone_id) * static_cast<off_t>(geom_.zone_capacity),
            static_cast<off_t>(geom_.zone_capacity));
#endif
  std::lock_guard<std::mutex> lk(state_mu_);
  return PersistState();
}

std::vector<ZoneDescriptor> Drive::ReportZones() const {
  std::vector<ZoneDescriptor> zones(geom_.zone_count);
  for (uint32_t i = 0; i < geom_.zone_count; i++) {
    zones[i].zone_id = i;
    zones[i].write_pointer = wps_[i].load(std::memory_order_acquire);
  }
  return zones;
}

uint64_t Drive::WritePointer(uint32_t zone_id) const {
  return wps_[zone_id].load(std::memory_order_acquire);
}

Status Drive::Close() {
  if (closed_) return Status::OK();
  closed_ = true;
  if (!crashed() && !failed()) {
    std::lock_guard<std::mutex> lk(state_mu_);
    Status s = PersistState();
    if (!s.ok()) return s;
  }
  return Status::OK();
}

Status OpenDriveArray(const DriveArrayOptions& options,
                      std::vector<std::unique_ptr<Drive>>* out) {
  out->clear();
  for (uint32_t i = 0; i < options.drive_count; i++) {
    DriveGeometry geom;
    geom.drive_id = i;
    geom.zone_count = options.zone_count;
    geom.zone_capacity = options.zone_capacity;
    geom.block_size = options.block_size;
    std::unique_ptr<Drive> drive;
    Status s = Drive::Open(options.dir, geom, &drive);
    if (!s.ok()) return s;
    out->push_back(std::move(drive));
  }
  return Status::OK();
}

}  // namespace zonestore
