#pragma once
// MVCC delta layer. Writes land in a versioned in-memory log (plus an
// append-only on-disk log) and become visible to snapshots opened after
// their commit. Queries merge exact brute-force results over the visible
// delta with filtered stable-index results; vacuum migrates records into
// the stable index without disturbing any open snapshot.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hmgi/errors.hpp"
#include "hmgi/types.hpp"

namespace hmgi {

enum class DeltaOp : std::uint8_t { Insert = 0, Update = 1, Delete = 2 };

struct DeltaRecord {
  NodeId id = kInvalidNode;
  DeltaOp op = DeltaOp::Insert;
  std::optional<std::vector<float>> embedding;  // absent for Delete
  Version version = 0;
  PartitionId partition = kInvalidPartition;
};

// A consistent read cut: sees exactly the records with version <= high_water,
// latest per id. Obtained from SnapshotRegistry::open(); registration is
// dropped when the snapshot is destroyed.
struct ReadSnapshot {
  std::uint64_t stable_epoch = 0;
  Version high_water = 0;
};

using SnapshotRef = std::shared_ptr<const ReadSnapshot>;

class SnapshotRegistry {
 public:
  Version committed() const {
    std::lock_guard lock(mu_);
    return committed_;
  }

  Version next_version() {
    std::lock_guard lock(mu_);
    return ++committed_;
  }

  void bump_epoch() {
    std::lock_guard lock(mu_);
    ++epoch_;
  }

  void restore_committed(Version v) {
    std::lock_guard lock(mu_);
    committed_ = v;
  }

  SnapshotRef open();

  // Smallest high-water mark among open snapshots; max Version when none.
  Version min_open_watermark() const;
  // Largest high-water mark among open snapshots; 0 when none.
  Version max_open_watermark() const;

 private:
  mutable std::mutex mu_;
  Version committed_ = 0;
  std::uint64_t epoch_ = 0;
  std::multiset<Version> open_;
};

// Versioned record log for one partition. Versions strictly increase.
class PartitionDelta {
 public:
  void append(DeltaRecord rec);
  void erase_version(Version v);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // Latest visible record per id at the snapshot's high-water mark.
  std::unordered_map<NodeId, const DeltaRecord*> visible_map(
      Version high_water) const;

  // Exact cosine top-k over visible Insert/Update records. Delete records
  // contribute no hits.
  std::vector<SearchHit> search(Version high_water,
                                std::span<const float> query, std::uint32_t k,
                                PartitionId partition) const;

  // Records in version order (apply order for vacuum).
  const std::map<Version, DeltaRecord>& records() const { return records_; }

  // Latest record for an id regardless of snapshots (stage-time checks).
  const DeltaRecord* latest(NodeId id) const;
  // All staged versions for an id, oldest first.
  std::vector<Version> versions_of(NodeId id) const;

 private:
  std::map<Version, DeltaRecord> records_;
  std::unordered_map<NodeId, std::vector<Version>> id_versions_;
};

// Append-only record-framed log: u32 payload length | payload | crc32.
// Replay stops at the first malformed or truncated frame, so an unclean
// shutdown loses at most the final partial record.
class DeltaLog {
 public:
  DeltaLog() = default;
  explicit DeltaLog(std::string path) : path_(std::move(path)) {}

  const std::string& path() const { return path_; }

  void append(const DeltaRecord& rec);
  std::vector<DeltaRecord> replay() const;
  // Replaces the log contents with exactly these records.
  void rewrite(const std::vector<DeltaRecord>& records);

 private:
  std::string path_;
};

struct MergeReport {
  std::uint64_t inserted = 0;
  std::uint64_t updated = 0;
  std::uint64_t deleted = 0;
  std::uint64_t deferred = 0;  // blocked by an open snapshot
  std::uint64_t compacted_partitions = 0;

  std::uint64_t applied() const { return inserted + updated + deleted; }
  MergeReport& operator+=(const MergeReport& o) {
    inserted += o.inserted;
    updated += o.updated;
    deleted += o.deleted;
    deferred += o.deferred;
    compacted_partitions += o.compacted_partitions;
    return *this;
  }
};

// Worker budget for merge work: max(1, floor(parallelism * (1 - cpu_load))),
// clamped to the configured maximum.
std::uint32_t adaptive_merge_threads(double cpu_load, std::uint32_t parallelism,
                                     std::uint32_t max_threads);

}  // namespace hmgi
