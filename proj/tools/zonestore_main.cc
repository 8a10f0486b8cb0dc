// Copyright (c) 2026-present, the zonestore authors. All rights reserved.
// This source code is licensed under the Apache 2.0 License
// (found in the LICENSE file in the root directory).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "zonestore/bench.h"
#include "zonestore/store.h"

namespace fs = std::filesystem;
using namespace zonestore;

namespace {

// Sizes accept plain bytes or KiB/MiB/GiB suffixes (also K/M/G).
bool ParseSize(const std::string& text, uint64_t* out) {
  if (text.empty()) return false;
  size_t pos = 0;
  double value = 0;
  try {
    value = std::stod(text, &pos);
  } catch (...) {
    return false;
  }
  std::string suffix = text.substr(pos);
  for (auto& c : suffix) c = static_cast<char>(tolower(c));
  uint64_t mult = 1;
  if (suffix == "" || suffix == "b") mult = 1;
  else if (suffix == "k" || suffix == "kib") mult = 1ull << 10;
  else if (suffix == "m" || suffix == "mib") mult = 1ull << 20;
  else if (suffix == "g" || suffix == "gib") mult = 1ull << 30;
  else return false;
  *out = static_cast<uint64_t>(value * static_cast<double>(mult));
  return true;
}

std::string ConfPath(const std::string& dir) { return dir + "/store.conf"; }

void WriteConf(const StoreOptions& o) {
  std::ofstream out(ConfPath(o.data_dir), std::ios::trunc);
  out << "drives=" << o.drive_count << "\n"
      << "zones=" << o.zone_count << "\n"
      << "zone_capacity=" << o.zone_capacity << "\n"
      << "block_size=" << o.block_size << "\n"
      << "width=" << o.width << "\n"
      << "sb_zones=" << o.superblock_zones_per_drive << "\n"
      << "flash_dir=" << o.flash_dir << "\n"
      << "segment_bytes=" << o.segment_bytes << "\n"
      << "fifo_bytes=" << o.fifo_bytes << "\n"
      << "durable_acks=" << (o.durable_acks ? 1 : 0) << "\n";
}

bool LoadConf(const std::string& dir, StoreOptions* o) {
  std::ifstream in(ConfPath(dir));
  if (!in) return false;
  o->data_dir = dir;
  std::string line;
  while (std::getline(in, line)) {
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "drives") o->drive_count = std::stoul(value);
    else if (key == "zones") o->zone_count = std::stoul(value);
    else if (key == "zone_capacity") o->zone_capacity = std::stoull(value);
    else if (key == "block_size") o->block_size = std::stoul(value);
    else if (key == "width") o->width = std::stoul(value);
    else if (key == "sb_zones")
      o->superblock_zones_per_drive = std::stoul(value);
    else if (key == "flash_dir") o->flash_dir = value;
    else if (key == "segment_bytes") o->segment_bytes = std::stoull(value);
    else if (key == "fifo_bytes") o->fifo_bytes = std::stoull(value);
    else if (key == "durable_acks") o->durable_acks = value == "1";
  }
  return true;
}

int Fail(const Status& s) {
  std::cerr << "error: " << s.ToString() << std::endl;
  return 1;
}

bool ParseSizeModel(const std::string& text, bench::SizeModel* model) {
  // fixed:<size>  or  lognormal:<mode>,<sigma>,<min>,<max>
  const size_t colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (kind == "fixed") {
    uint64_t size = 0;
    if (colon == std::string::npos || !ParseSize(text.substr(colon + 1), &size))
      return false;
    *model = bench::SizeModel::Fixed(size);
    return true;
  }
  if (kind == "lognormal") {
    if (colon == std::string::npos) return false;
    std::istringstream in(text.substr(colon + 1));
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(in, part, ',')) parts.push_back(part);
    if (parts.size() != 4) return false;
    uint64_t mode = 0, min = 0, max = 0;
    if (!ParseSize(parts[0], &mode) || !ParseSize(parts[2], &min) ||
        !ParseSize(parts[3], &max))
      return false;
    *model = bench::SizeModel::LogNormal(mode, std::stod(parts[1]), min, max);
    return true;
  }
  return false;
}

Status OpenFromConf(const std::string& dir, StoreOptions* opts,
                    std::unique_ptr<ObjectStore>* store,
                    RecoveryReport* report = nullptr) {
  if (!LoadConf(dir, opts))
    return Status::InvalidArgument("no store.conf under " + dir +
                                   " (run init first)");
  return ObjectStore::Open(*opts, store, report);
}

void EmitMetrics(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"log-structured object store on emulated zoned drives"};
  app.require_subcommand(1);

  std::string dir, flash, id_hex, file, out_path, metrics_out, csv_out;
  std::string zone_size_text = "8MiB", size_model_text = "lognormal:2MiB,1.0,16KiB,160MiB";
  uint32_t drives = 6, zones = 64, width = 6, block = 4096, sb_zones = 2;
  uint32_t failed_drive = 0;
  bool no_payloads = false, wipe = false, gc_all = false, no_durable = false;
  double utilization = 0.8;
  double churn_percent = 300.0;
  uint64_t seed = 1;

  auto* init = app.add_subcommand("init", "format a new store");
  init->add_option("--dir", dir)->required();
  init->add_option("--flash", flash)->required();
  init->add_option("--drives", drives);
  init->add_option("--zones", zones);
  init->add_option("--zone-size", zone_size_text);
  init->add_option("--width", width);
  init->add_option("--block", block);
  init->add_option("--sb-zones", sb_zones);

  auto* put = app.add_subcommand("put", "store an object");
  put->add_option("--dir", dir)->required();
  put->add_option("--id", id_hex)->required();
  put->add_option("--file", file)->required();

  auto* get = app.add_subcommand("get", "read an object");
  get->add_option("--dir", dir)->required();
  get->add_option("--id", id_hex)->required();
  get->add_option("--out", out_path);

  auto* del = app.add_subcommand("delete", "delete an object");
  del->add_option("--dir", dir)->required();
  del->add_option("--id", id_hex)->required();

  auto* stat = app.add_subcommand("stat", "describe an object");
  stat->add_option("--dir", dir)->required();
  stat->add_option("--id", id_hex)->required();

  auto* gc = app.add_subcommand("gc", "run garbage collection");
  gc->add_option("--dir", dir)->required();
  gc->add_flag("--all", gc_all, "clean until no victim remains");

  auto* snapshot = app.add_subcommand("snapshot", "take an index snapshot");
  snapshot->add_option("--dir", dir)->required();

  auto* recover = app.add_subcommand("recover", "recover and report");
  recover->add_option("--dir", dir)->required();
  recover->add_option("--metrics-out", metrics_out);

  auto* rebuild = app.add_subcommand("rebuild", "rebuild after drive failure");
  rebuild->add_option("--dir", dir)->required();
  rebuild->add_option("--failed-drive", failed_drive)->required();

  auto* fsck = app.add_subcommand("fsck", "offline consistency scan");
  fsck->add_option("--dir", dir)->required();
  fsck->add_flag("--no-payloads", no_payloads);

  auto* b = app.add_subcommand("bench", "benchmark harness");
  b->require_subcommand(1);
  auto add_bench_common = [&](CLI::App* cmd) {
    cmd->add_option("--dir", dir)->required();
    cmd->add_option("--flash", flash);
    cmd->add_option("--seed", seed);
    cmd->add_option("--size-model", size_model_text);
    cmd->add_option("--metrics-out", metrics_out);
    cmd->add_flag("--wipe", wipe, "recreate the store directory");
    cmd->add_flag("--no-durable-acks", no_durable);
  };
  auto* bench_fill = b->add_subcommand("fill", "pure ingest");
  add_bench_common(bench_fill);
  bench_fill->add_option("--utilization", utilization);
  auto* bench_read = b->add_subcommand("read", "random full-object reads");
  add_bench_common(bench_read);
  bench_read->add_option("--utilization", utilization);
  auto* bench_churn = b->add_subcommand("churn", "steady-state churn");
  add_bench_common(bench_churn);
  bench_churn->add_option("--utilization", utilization);
  bench_churn->add_option("--churn-percent", churn_percent);
  auto* bench_recovery = b->add_subcommand("recovery", "recovery trend");
  add_bench_common(bench_recovery);
  bench_recovery->add_option("--csv-out", csv_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (init->parsed()) {
    StoreOptions opts;
    opts.data_dir = dir;
    opts.flash_dir = flash;
    opts.drive_count = drives;
    opts.zone_count = zones;
    opts.width = width;
    opts.block_size = block;
    opts.superblock_zones_per_drive = sb_zones;
    if (!ParseSize(zone_size_text, &opts.zone_capacity)) {
      std::cerr << "bad --zone-size" << std::endl;
      return 2;
    }
    Status s = ObjectStore::Create(opts);
    if (!s.ok()) return Fail(s);
    WriteConf(opts);
    std::cout << "formatted " << dir << " (" << drives << " drives x "
              << zones << " zones x " << opts.zone_capacity << " bytes)"
              << std::endl;
    return 0;
  }

  if (put->parsed() || get->parsed() || del->parsed() || stat->parsed()) {
    const auto id = ObjectId::FromHex(id_hex);
    if (!id) {
      std::cerr << "--id must be 64 hex characters" << std::endl;
      return 2;
    }
    StoreOptions opts;
    std::unique_ptr<ObjectStore> store;
    Status s = OpenFromConf(dir, &opts, &store);
    if (!s.ok()) return Fail(s);
    if (put->parsed()) {
      std::vector<uint8_t> data;
      if (file == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        const std::string& str = buf.str();
        data.assign(str.begin(), str.end());
      } else {
        std::ifstream in(file, std::ios::binary | std::ios::ate);
        if (!in) return Fail(Status::IOError("cannot open " + file));
        data.resize(static_cast<size_t>(in.tellg()));
        in.seekg(0);
        in.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(data.size()));
      }
      Timestamp version = 0;
      s = store->Put(*id, data, &version);
      if (!s.ok()) return Fail(s);
      std::cout << "stored " << data.size() << " bytes as version " << version
                << std::endl;
    } else if (get->parsed()) {
      std::vector<uint8_t> data;
      Timestamp version = 0;
      s = store->Get(*id, &data, &version);
      if (!s.ok()) return Fail(s);
      if (out_path.empty()) {
        std::cout.write(reinterpret_cast<const char*>(data.data()),
                        static_cast<std::streamsize>(data.size()));
      } else {
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size()));
      }
    } else if (del->parsed()) {
      bool existed = false;
      s = store->Delete(*id, &existed);
      if (!s.ok()) return Fail(s);
      std::cout << (existed ? "deleted" : "not found") << std::endl;
    } else {
      ObjectStat os;
      s = store->Stat(*id, &os);
      if (!s.ok()) return Fail(s);
      std::cout << "version=" << os.version << " length=" << os.total_length
                << " segments=" << os.segment_count << std::endl;
    }
    s = store->Close();
    if (!s.ok()) return Fail(s);
    return 0;
  }

  if (gc->parsed() || snapshot->parsed() || recover->parsed() ||
      rebuild->parsed() || fsck->parsed()) {
    StoreOptions opts;
    std::unique_ptr<ObjectStore> store;
    RecoveryReport report;
    Status s = OpenFromConf(dir, &opts, &store, &report);
    if (!s.ok()) return Fail(s);
    if (gc->parsed()) {
      uint64_t total = 0;
      while (true) {
        uint64_t reclaimed = 0;
        s = store->RunGcOnce(&reclaimed);
        if (!s.ok()) return Fail(s);
        total += reclaimed;
        if (!gc_all || reclaimed == 0) break;
      }
      std::cout << "reclaimed " << total << " bytes" << std::endl;
    } else if (snapshot->parsed()) {
      s = store->TakeSnapshot();
      if (!s.ok()) return Fail(s);
      std::cout << "snapshot complete" << std::endl;
    } else if (recover->parsed()) {
      std::cout << report.ToText();
      EmitMetrics(metrics_out, report.ToMetrics());
    } else if (rebuild->parsed()) {
      s = store->FailDrive(failed_drive);
      if (!s.ok()) return Fail(s);
      RecoveryReport rr;
      s = store->RebuildDrive(failed_drive, &rr);
      if (!s.ok()) return Fail(s);
      std::cout << "rebuilt " << rr.zone_sets_examined << " zone sets in "
                << rr.wall_seconds << "s" << std::endl;
    } else if (fsck->parsed()) {
      FsckOptions fo;
      fo.verify_payloads = !no_payloads;
      FsckReport fr;
      s = store->Fsck(fo, &fr);
      if (!s.ok()) return Fail(s);
      std::cout << fr.ToText();
      if (!fr.consistent()) return 1;
    }
    s = store->Close();
    if (!s.ok()) return Fail(s);
    return 0;
  }

  if (b->parsed()) {
    bench::SizeModel model;
    if (!ParseSizeModel(size_model_text, &model)) {
      std::cerr << "bad --size-model" << std::endl;
      return 2;
    }
    StoreOptions opts;
    if (wipe || !fs::exists(ConfPath(dir))) {
      if (flash.empty()) flash = dir + "/flash";
      fs::remove_all(dir);
      fs::remove_all(flash);
      fs::create_directories(dir);
      opts.data_dir = dir;
      opts.flash_dir = flash;
      opts.durable_acks = !no_durable;
      Status s = ObjectStore::Create(opts);
      if (!s.ok()) return Fail(s);
      WriteConf(opts);
    }
    if (!LoadConf(dir, &opts))
      return Fail(Status::InvalidArgument("no store.conf under " + dir));
    opts.durable_acks = !no_durable;

    if (bench_recovery->parsed()) {
      bench::RecoveryBenchConfig cfg;
      cfg.store = opts;
      cfg.store.data_dir = dir + "/recovery-bench";
      cfg.store.flash_dir = opts.flash_dir + "/recovery-bench";
      cfg.workload.size_model = model;
      cfg.workload.seed = seed;
      const uint64_t set_payload =
          bench::EstimateEffectiveCapacity(opts, model) /
          std::max<uint64_t>(1, opts.zone_count -
                                    opts.superblock_zones_per_drive - 3);
      for (uint64_t mult : {0ull, 2ull, 4ull, 7ull, 10ull, 13ull, 16ull})
        cfg.post_snapshot_ingest.push_back(mult * set_payload);
      std::vector<bench::RecoveryBenchPoint> points;
      Status s = bench::RunRecoveryBench(cfg, &points);
      if (!s.ok()) return Fail(s);
      std::vector<double> x, y;
      std::ostringstream csv;
      csv << "post_snapshot_ingest,sets_examined,recovery_seconds\n";
      for (const auto& p : points) {
        csv << p.post_snapshot_ingest << "," << p.sets_examined << ","
            << p.recovery_seconds << "\n";
        x.push_back(static_cast<double>(p.sets_examined));
        y.push_back(p.recovery_seconds);
      }
      const bench::LinearFit fit = bench::FitLine(x, y);
      std::ostringstream metrics;
      metrics << "points=" << points.size() << "\n"
              << "fit_slope=" << fit.slope << "\n"
              << "fit_intercept=" << fit.intercept << "\n"
              << "fit_r_squared=" << fit.r_squared << "\n";
      if (!csv_out.empty()) {
        std::ofstream out(csv_out, std::ios::trunc);
        out << csv.str();
      } else {
        std::cout << csv.str();
      }
      EmitMetrics(metrics_out, metrics.str());
      return 0;
    }

    std::unique_ptr<ObjectStore> store;
    Status s = ObjectStore::Open(opts, &store);
    if (!s.ok()) return Fail(s);
    bench::WorkloadConfig wl;
    wl.size_model = model;
    wl.seed = seed;
    wl.target_utilization = utilization;
    const uint64_t capacity = bench::EstimateEffectiveCapacity(opts, model);
    bench::WorkloadGenerator gen(wl, capacity);
    bench::ShadowMap shadow;
    bench::RunMetrics metrics;
    if (bench_fill->parsed()) {
      s = bench::RunFillPhase(store.get(), &gen, &shadow, &metrics);
    } else if (bench_read->parsed()) {
      s = bench::RunFillPhase(store.get(), &gen, &shadow, nullptr);
      if (s.ok())
        s = bench::RunReadPhase(store.get(), shadow,
                                static_cast<uint32_t>(shadow.size()), seed,
                                &metrics);
    } else {  // churn
      s = bench::RunFillPhase(store.get(), &gen, &shadow, nullptr);
      if (s.ok()) {
        wl.total_ingest =
            static_cast<uint64_t>(churn_percent / 100.0 *
                                  static_cast<double>(capacity));
        s = bench::RunChurnPhase(store.get(), &gen, &shadow, wl.total_ingest,
                                 /*verify_every_n=*/0, &metrics);
      }
    }
    if (!s.ok()) return Fail(s);
    EmitMetrics(metrics_out, metrics.ToMetricsText());
    s = store->Close();
    if (!s.ok()) return Fail(s);
    return 0;
  }

  return 2;
}
