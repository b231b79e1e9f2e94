#include "hmgi/delta_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "hmgi/binary_io.hpp"

namespace hmgi {

SnapshotRef SnapshotRegistry::open() {
  std::lock_guard lock(mu_);
  auto it = open_.insert(committed_);
  auto snap = new ReadSnapshot{epoch_, committed_};
  return SnapshotRef(snap, [this, it](const ReadSnapshot* s) {
    {
      std::lock_guard inner(mu_);
      open_.erase(it);
    }
    delete s;
  });
}

Version SnapshotRegistry::min_open_watermark() const {
  std::lock_guard lock(mu_);
  if (open_.empty()) return std::numeric_limits<Version>::max();
  return *open_.begin();
}

Version SnapshotRegistry::max_open_watermark() const {
  std::lock_guard lock(mu_);
  if (open_.empty()) return 0;
  return *open_.rbegin();
}

void PartitionDelta::append(DeltaRecord rec) {
  if (!records_.empty() && rec.version <= records_.rbegin()->first)
    throw ParameterError("delta versions must strictly increase");
  id_versions_[rec.id].push_back(rec.version);
  records_.emplace(rec.version, std::move(rec));
}

void PartitionDelta::erase_version(Version v) {
  auto it = records_.find(v);
  if (it == records_.end()) return;
  NodeId id = it->second.id;
  records_.erase(it);
  auto lv = id_versions_.find(id);
  if (lv != id_versions_.end()) {
    std::erase(lv->second, v);
    if (lv->second.empty()) id_versions_.erase(lv);
  }
}

std::unordered_map<NodeId, const DeltaRecord*> PartitionDelta::visible_map(
    Version high_water) const {
  std::unordered_map<NodeId, const DeltaRecord*> out;
  for (const auto& [v, rec] : records_) {
    if (v > high_water) break;
    out[rec.id] = &rec;  // later versions overwrite: latest wins
  }
  return out;
}

std::vector<SearchHit> PartitionDelta::search(Version high_water,
                                              std::span<const float> query,
                                              std::uint32_t k,
                                              PartitionId partition) const {
  std::vector<SearchHit> hits;
  for (const auto& [id, rec] : visible_map(high_water)) {
    if (rec->op == DeltaOp::Delete) continue;
    const std::vector<float>& e = *rec->embedding;
    double dot = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) dot += double{e[i]} * query[i];
    hits.push_back(SearchHit{id,
                             std::clamp(1.0f - static_cast<float>(dot), 0.0f, 2.0f),
                             partition});
  }
  std::sort(hits.begin(), hits.end(), hit_order);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

const DeltaRecord* PartitionDelta::latest(NodeId id) const {
  auto it = id_versions_.find(id);
  if (it == id_versions_.end() || it->second.empty()) return nullptr;
  return &records_.at(it->second.back());
}

std::vector<Version> PartitionDelta::versions_of(NodeId id) const {
  auto it = id_versions_.find(id);
  if (it == id_versions_.end()) return {};
  return it->second;
}

namespace {

std::string encode_record(const DeltaRecord& rec) {
  BinaryWriter w;
  w.put_u64(rec.version);
  w.put_u64(rec.id);
  w.put_u32(rec.partition);
  w.put_u8(static_cast<std::uint8_t>(rec.op));
  w.put_u8(rec.embedding.has_value() ? 1 : 0);
  if (rec.embedding.has_value()) {
    w.put_u32(static_cast<std::uint32_t>(rec.embedding->size()));
    for (float x : *rec.embedding) w.put_f32(x);
  }
  return w.bytes();
}

DeltaRecord decode_record(const std::string& payload) {
  BinaryReader r(payload);
  DeltaRecord rec;
  rec.version = r.get_u64();
  rec.id = r.get_u64();
  rec.partition = r.get_u32();
  rec.op = static_cast<DeltaOp>(r.get_u8());
  if (r.get_u8() != 0) {
    std::uint32_t dim = r.get_u32();
    std::vector<float> e(dim);
    for (auto& x : e) x = r.get_f32();
    rec.embedding = std::move(e);
  }
  return rec;
}

}  // namespace

void DeltaLog::append(const DeltaRecord& rec) {
  std::ofstream f(path_, std::ios::binary | std::ios::app);
  if (!f) throw IoFailure("cannot open delta log " + path_);
  std::string payload = encode_record(rec);
  BinaryWriter frame;
  frame.put_u32(static_cast<std::uint32_t>(payload.size()));
  frame.put_bytes(payload.data(), payload.size());
  frame.put_u32(crc32_bytes(payload.data(), payload.size()));
  f.write(frame.bytes().data(),
          static_cast<std::streamsize>(frame.bytes().size()));
  if (!f) throw IoFailure("short write to delta log " + path_);
}

std::vector<DeltaRecord> DeltaLog::replay() const {
  std::vector<DeltaRecord> out;
  std::ifstream f(path_, std::ios::binary);
  if (!f) return out;  // no log yet
  std::string raw((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  while (pos + 8 <= raw.size()) {
    BinaryReader header(raw.data() + pos, 4);
    std::uint32_t len = header.get_u32();
    if (pos + 4 + len + 4 > raw.size()) break;  // partial tail frame
    std::string payload = raw.substr(pos + 4, len);
    BinaryReader crc_reader(raw.data() + pos + 4 + len, 4);
    if (crc_reader.get_u32() != crc32_bytes(payload.data(), payload.size()))
      break;  // corrupt tail
    out.push_back(decode_record(payload));
    pos += 4 + len + 4;
  }
  return out;
}

void DeltaLog::rewrite(const std::vector<DeltaRecord>& records) {
  const std::string tmp = path_ + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot open " + tmp);
    for (const DeltaRecord& rec : records) {
      std::string payload = encode_record(rec);
      BinaryWriter frame;
      frame.put_u32(static_cast<std::uint32_t>(payload.size()));
      frame.put_bytes(payload.data(), payload.size());
      frame.put_u32(crc32_bytes(payload.data(), payload.size()));
      f.write(frame.bytes().data(),
              static_cast<std::streamsize>(frame.bytes().size()));
    }
    if (!f) throw IoFailure("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path_.c_str()) != 0)
    throw IoFailure("cannot rename " + tmp + " to " + path_);
}

std::uint32_t adaptive_merge_threads(double cpu_load, std::uint32_t parallelism,
                                     std::uint32_t max_threads) {
  if (cpu_load < 0.0 || cpu_load > 1.0)
    throw ParameterError("cpu_load must be in [0, 1]");
  auto budget = static_cast<std::uint32_t>(
      std::floor(parallelism * (1.0 - cpu_load)));
  budget = std::max(1u, budget);
  return std::min(budget, std::max(1u, max_threads));
}

}  // namespace hmgi
