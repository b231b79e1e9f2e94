#include "hmgi/partitioned_store.hpp"

#include <algorithm>
#include <filesystem>
#include <thread>

#include <nlohmann/json.hpp>

namespace hmgi {

namespace {
constexpr char kSharedKey[] = "*";  // partition key in monolithic mode
}

PartitionedVectorStore::PartitionedVectorStore(VectorStoreConfig config)
    : config_(std::move(config)) {}

PartitionId PartitionedVectorStore::ensure_partition_locked(
    const Modality& modality, std::uint32_t cluster, std::uint32_t dim) {
  const std::string key =
      config_.partitioning ? modality.name() : std::string(kSharedKey);
  const std::uint32_t eff_cluster = config_.partitioning ? cluster : 0;
  auto it = by_key_.find({key, eff_cluster});
  if (it != by_key_.end()) {
    const Partition& part = *parts_[it->second];
    if (part.info.dim != dim)
      throw DimensionMismatch(
          "partition " + key + "/" + std::to_string(eff_cluster) + " has dim " +
          std::to_string(part.info.dim) + ", embedding has " +
          std::to_string(dim));
    return it->second;
  }
  auto part = std::make_unique<Partition>();
  PartitionId id = static_cast<PartitionId>(parts_.size());
  part->info = PartitionInfo{id, config_.partitioning ? modality
                                                      : Modality::other(kSharedKey),
                             eff_cluster, dim};
  HnswParams params = config_.hnsw;
  params.seed = config_.hnsw.seed + id;
  part->stable = HnswIndex(dim, params, config_.quant);
  parts_.push_back(std::move(part));
  by_key_[{key, eff_cluster}] = id;
  return id;
}

PartitionId PartitionedVectorStore::route_locked(
    const Modality& modality, std::span<const float> embedding) {
  std::uint32_t cluster = 0;
  if (config_.partitioning) {
    auto it = models_.find(modality.name());
    if (it != models_.end()) cluster = assign_partition(embedding, it->second);
  }
  return ensure_partition_locked(modality, cluster,
                                 static_cast<std::uint32_t>(embedding.size()));
}

Version PartitionedVectorStore::stage_record_locked(PartitionId p,
                                                    DeltaRecord rec) {
  Partition& part = *parts_[p];
  rec.partition = p;
  const Version v = rec.version;
  if (log_attached_()) log_.append(rec);
  {
    std::unique_lock data(part.data_mu);
    part.delta.append(std::move(rec));
  }
  return v;
}

Version PartitionedVectorStore::stage_insert(NodeId id, const Modality& modality,
                                             std::vector<float> embedding,
                                             EmbeddingRef* ref_out) {
  std::lock_guard commit(commit_mu_);
  PartitionId p;
  {
    std::unique_lock topo(topo_mu_);
    if (locator_.count(id))
      throw DuplicateInsert("id " + std::to_string(id) + " already live");
    p = route_locked(modality, embedding);
    locator_[id] = p;
    auto model_it = models_.find(modality.name());
    if (model_it != models_.end())
      model_it->second.assignment_counts[parts_[p]->info.cluster]++;
  }
  DeltaRecord rec;
  rec.id = id;
  rec.op = DeltaOp::Insert;
  rec.embedding = std::move(embedding);
  rec.version = registry_.next_version();
  Version v = stage_record_locked(p, std::move(rec));
  if (ref_out) *ref_out = EmbeddingRef{p, kDeltaSlot};
  maybe_auto_vacuum(p);
  return v;
}

Version PartitionedVectorStore::stage_update(NodeId id,
                                             std::vector<float> embedding) {
  std::lock_guard commit(commit_mu_);
  PartitionId p;
  {
    std::shared_lock topo(topo_mu_);
    auto it = locator_.find(id);
    if (it == locator_.end()) throw UnknownId("id " + std::to_string(id));
    p = it->second;
    if (parts_[p]->info.dim != embedding.size())
      throw DimensionMismatch("update embedding length " +
                              std::to_string(embedding.size()));
  }
  DeltaRecord rec;
  rec.id = id;
  rec.op = DeltaOp::Update;
  rec.embedding = std::move(embedding);
  rec.version = registry_.next_version();
  Version v = stage_record_locked(p, std::move(rec));
  maybe_auto_vacuum(p);
  return v;
}

Version PartitionedVectorStore::stage_delete(NodeId id) {
  std::lock_guard commit(commit_mu_);
  PartitionId p;
  {
    std::unique_lock topo(topo_mu_);
    auto it = locator_.find(id);
    if (it == locator_.end()) throw UnknownId("id " + std::to_string(id));
    p = it->second;
    locator_.erase(it);
    Partition& part = *parts_[p];
    auto model_it = models_.find(part.info.modality.name());
    if (model_it != models_.end()) {
      auto& count = model_it->second.assignment_counts[part.info.cluster];
      if (count > 0) --count;
    }
  }
  Partition& part = *parts_[p];
  Version v = registry_.next_version();

  // A delete of an id that only exists in the delta annihilates the pair
  // immediately, provided no open snapshot could still see the insert.
  {
    std::unique_lock data(part.data_mu);
    if (part.delta.latest(id) != nullptr && !part.stable.contains(id)) {
      std::vector<Version> chain = part.delta.versions_of(id);
      if (!chain.empty() && registry_.max_open_watermark() < chain.front()) {
        for (Version ver : chain) part.delta.erase_version(ver);
        if (log_attached_()) {
          DeltaRecord rec;
          rec.id = id;
          rec.op = DeltaOp::Delete;
          rec.version = v;
          rec.partition = p;
          log_.append(rec);
        }
        return v;
      }
    }
  }

  DeltaRecord rec;
  rec.id = id;
  rec.op = DeltaOp::Delete;
  rec.version = v;
  stage_record_locked(p, std::move(rec));
  maybe_auto_vacuum(p);
  return v;
}

bool PartitionedVectorStore::contains(NodeId id) const {
  std::shared_lock topo(topo_mu_);
  return locator_.count(id) > 0;
}

std::optional<PartitionId> PartitionedVectorStore::partition_of(NodeId id) const {
  std::shared_lock topo(topo_mu_);
  auto it = locator_.find(id);
  if (it == locator_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::vector<float>> PartitionedVectorStore::current_embedding(
    NodeId id) const {
  std::shared_lock topo(topo_mu_);
  auto it = locator_.find(id);
  if (it == locator_.end()) return std::nullopt;
  const Partition& part = *parts_[it->second];
  std::shared_lock data(part.data_mu);
  const DeltaRecord* latest = part.delta.latest(id);
  if (latest != nullptr && latest->op != DeltaOp::Delete)
    return latest->embedding;
  if (part.stable.contains(id)) return part.stable.vector_of(id);
  return std::nullopt;
}

std::optional<std::vector<float>> PartitionedVectorStore::embedding_at(
    const SnapshotRef& snapshot, NodeId id) const {
  const Version hw = snapshot->high_water;
  std::shared_lock topo(topo_mu_);
  for (const auto& part : parts_) {
    std::shared_lock data(part->data_mu);
    // Latest visible delta record for the id in this partition.
    const DeltaRecord* visible = nullptr;
    for (Version v : part->delta.versions_of(id)) {
      if (v > hw) break;
      visible = &part->delta.records().at(v);
    }
    if (visible != nullptr) {
      if (visible->op != DeltaOp::Delete) return visible->embedding;
      continue;  // deleted here; a migration insert may live elsewhere
    }
    if (part->stable.contains(id)) {
      auto vf = part->visible_from.find(id);
      if (vf == part->visible_from.end() || vf->second <= hw)
        return part->stable.vector_of(id);
    }
  }
  return std::nullopt;
}

std::vector<std::vector<float>> PartitionedVectorStore::sample_embeddings(
    const Modality& modality, std::size_t cap) const {
  std::shared_lock topo(topo_mu_);
  std::vector<std::vector<float>> out;
  for (PartitionId p : target_partitions(modality)) {
    const Partition& part = *parts_[p];
    std::shared_lock data(part.data_mu);
    part.stable.for_each_live([&](NodeId, std::uint32_t slot) {
      if (out.size() < cap) out.push_back(part.stable.arena().get(slot));
    });
    if (out.size() >= cap) break;
    for (const auto& [v, rec] : part.delta.records()) {
      if (out.size() >= cap) break;
      if (rec.op != DeltaOp::Delete && rec.embedding.has_value())
        out.push_back(*rec.embedding);
    }
  }
  return out;
}

std::vector<PartitionId> PartitionedVectorStore::target_partitions(
    const std::optional<Modality>& modality) const {
  std::vector<PartitionId> out;
  for (const auto& part : parts_) {
    if (!modality.has_value() || !config_.partitioning ||
        part->info.modality == *modality)
      out.push_back(part->info.id);
  }
  return out;
}

std::vector<SearchHit> PartitionedVectorStore::hybrid_topk(
    const SnapshotRef& snapshot, const std::optional<Modality>& modality,
    std::span<const float> query, std::uint32_t k,
    std::optional<std::uint32_t> ef, QueryStats* stats) const {
  const Version hw = snapshot->high_water;
  std::shared_lock topo(topo_mu_);
  std::vector<PartitionId> targets = target_partitions(modality);

  std::vector<SearchHit> merged;
  std::uint64_t delta_pool = 0;
  std::uint64_t stable_pool = 0;
  std::vector<NodeId> from_delta;

  for (PartitionId p : targets) {
    const Partition& part = *parts_[p];
    if (part.info.dim != query.size()) continue;  // other-dim partition
    std::shared_lock data(part.data_mu);
    auto visible = part.delta.visible_map(hw);

    std::uint64_t visible_live = 0;
    for (const auto& [id, rec] : visible)
      if (rec->op != DeltaOp::Delete) ++visible_live;
    delta_pool += visible_live;
    stable_pool += part.stable.live_count();

    if (part.stable.live_count() > 0) {
      SearchFilter filter = [&](NodeId id) {
        if (visible.count(id)) return false;
        auto vf = part.visible_from.find(id);
        return vf == part.visible_from.end() || vf->second <= hw;
      };
      auto hits = part.stable.search(query, k, ef, &filter);
      for (SearchHit& h : hits) h.partition = p;
      merged.insert(merged.end(), hits.begin(), hits.end());
    }
    if (visible_live > 0) {
      auto hits = part.delta.search(hw, query, k, p);
      for (const SearchHit& h : hits) from_delta.push_back(h.id);
      merged.insert(merged.end(), hits.begin(), hits.end());
    }
  }

  std::sort(merged.begin(), merged.end(), hit_order);
  std::vector<SearchHit> out;
  out.reserve(std::min<std::size_t>(k, merged.size()));
  std::unordered_map<NodeId, bool> seen;
  for (const SearchHit& h : merged) {
    if (seen.emplace(h.id, true).second) out.push_back(h);
    if (out.size() >= k) break;
  }

  if (stats != nullptr) {
    stats->partitions_probed = std::move(targets);
    stats->candidate_pool = stable_pool + delta_pool;
    stats->delta_hits = 0;
    std::unordered_map<NodeId, bool> delta_ids;
    for (NodeId id : from_delta) delta_ids[id] = true;
    for (const SearchHit& h : out)
      if (delta_ids.count(h.id)) ++stats->delta_hits;
    stats->stable_hits = out.size() - stats->delta_hits;
  }
  return out;
}

void PartitionedVectorStore::maybe_auto_vacuum(PartitionId p) {
  if (!config_.use_delta) {
    vacuum_partition(p, std::numeric_limits<std::uint64_t>::max());
    return;
  }
  if (!config_.auto_vacuum) return;
  bool trigger = false;
  {
    std::shared_lock topo(topo_mu_);
    const Partition& part = *parts_[p];
    std::shared_lock data(part.data_mu);
    const double stable_size = static_cast<double>(part.stable.live_count());
    const auto delta_size = static_cast<double>(part.delta.size());
    trigger = delta_size > stable_size * config_.delta_watermark_fraction ||
              delta_size > static_cast<double>(config_.delta_watermark_records);
  }
  if (trigger)
    vacuum_partition(p, std::numeric_limits<std::uint64_t>::max());
}

MergeReport PartitionedVectorStore::vacuum_one(Partition& part,
                                               std::uint64_t max_batch) {
  std::lock_guard one_at_a_time(part.vacuum_mu);
  MergeReport rep;
  const Version min_open = registry_.min_open_watermark();
  std::vector<Version> applied;

  std::unique_lock data(part.data_mu);
  std::uint64_t budget = max_batch;
  for (const auto& [version, rec] : part.delta.records()) {
    if (budget == 0) break;
    switch (rec.op) {
      case DeltaOp::Insert: {
        std::uint32_t slot = part.stable.insert(rec.id, *rec.embedding);
        part.visible_from[rec.id] = version;
        if (config_.ref_callback)
          config_.ref_callback(rec.id, EmbeddingRef{part.info.id, slot});
        applied.push_back(version);
        ++rep.inserted;
        --budget;
        break;
      }
      case DeltaOp::Update: {
        if (min_open < version) {
          ++rep.deferred;
          continue;
        }
        if (part.stable.contains(rec.id)) part.stable.remove(rec.id);
        std::uint32_t slot = part.stable.insert(rec.id, *rec.embedding);
        part.visible_from[rec.id] = version;
        if (config_.ref_callback)
          config_.ref_callback(rec.id, EmbeddingRef{part.info.id, slot});
        applied.push_back(version);
        ++rep.updated;
        --budget;
        break;
      }
      case DeltaOp::Delete: {
        if (min_open < version) {
          ++rep.deferred;
          continue;
        }
        if (part.stable.contains(rec.id)) part.stable.remove(rec.id);
        part.visible_from.erase(rec.id);
        applied.push_back(version);
        ++rep.deleted;
        --budget;
        break;
      }
    }
  }
  for (Version v : applied) part.delta.erase_version(v);

  // Visibility entries older than every open snapshot filter nothing.
  std::erase_if(part.visible_from,
                [&](const auto& kv) { return kv.second <= min_open; });

  if (part.stable.tombstone_fraction() > config_.tombstone_rebuild_fraction) {
    part.stable.compact();
    ++rep.compacted_partitions;
    if (config_.ref_callback) {
      part.stable.for_each_live([&](NodeId id, std::uint32_t slot) {
        config_.ref_callback(id, EmbeddingRef{part.info.id, slot});
      });
    }
  }
  return rep;
}

MergeReport PartitionedVectorStore::vacuum_partition(PartitionId p,
                                                     std::uint64_t max_batch) {
  std::shared_lock topo(topo_mu_);
  if (p >= parts_.size()) throw UnknownPartition(std::to_string(p));
  return vacuum_one(*parts_[p], max_batch);
}

MergeReport PartitionedVectorStore::vacuum(std::uint64_t max_batch) {
  MergeReport rep;
  std::vector<PartitionId> all;
  {
    std::shared_lock topo(topo_mu_);
    for (const auto& part : parts_) all.push_back(part->info.id);
  }
  for (PartitionId p : all) rep += vacuum_partition(p, max_batch);
  return rep;
}

MergeReport PartitionedVectorStore::vacuum_parallel(std::uint64_t max_batch,
                                                    double cpu_load) {
  std::uint32_t hardware = std::max(1u, std::thread::hardware_concurrency());
  std::uint32_t budget =
      adaptive_merge_threads(cpu_load, hardware, config_.max_merge_threads);
  std::vector<PartitionId> all;
  {
    std::shared_lock topo(topo_mu_);
    for (const auto& part : parts_) all.push_back(part->info.id);
  }
  std::vector<MergeReport> reports(budget);
  std::vector<std::thread> workers;
  for (std::uint32_t w = 0; w < budget; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < all.size(); i += budget)
        reports[w] += vacuum_partition(all[i], max_batch);
    });
  }
  for (auto& t : workers) t.join();
  MergeReport rep;
  for (const MergeReport& r : reports) rep += r;
  return rep;
}

void PartitionedVectorStore::install_model(const PartitionModel& model) {
  std::lock_guard commit(commit_mu_);
  std::unique_lock topo(topo_mu_);
  models_[model.modality.name()] = model;
  for (std::uint32_t c = 0; c < model.k; ++c)
    ensure_partition_locked(model.modality, c, model.dim);
}

std::optional<PartitionModel> PartitionedVectorStore::model_of(
    const Modality& modality) const {
  std::shared_lock topo(topo_mu_);
  auto it = models_.find(modality.name());
  if (it == models_.end()) return std::nullopt;
  return it->second;
}

void PartitionedVectorStore::apply_repartition(const Modality& modality,
                                               const RepartitionPlan& plan) {
  std::lock_guard commit(commit_mu_);
  {
    std::unique_lock topo(topo_mu_);
    auto it = models_.find(modality.name());
    const std::uint64_t current =
        it == models_.end() ? 0 : it->second.model_version;
    if (current != plan.base_model_version)
      throw StaleModelVersion("model version " + std::to_string(current) +
                              ", plan built against " +
                              std::to_string(plan.base_model_version));
    models_[modality.name()] = plan.refit;
    for (std::uint32_t c = 0; c < plan.refit.k; ++c)
      ensure_partition_locked(modality, c, plan.refit.dim);
  }

  for (const auto& [id, old_cluster, new_cluster] : plan.moves) {
    std::optional<std::vector<float>> embedding = current_embedding(id);
    if (!embedding.has_value()) continue;  // deleted since planning
    PartitionId old_p;
    PartitionId new_p;
    {
      std::unique_lock topo(topo_mu_);
      auto loc = locator_.find(id);
      if (loc == locator_.end()) continue;
      old_p = loc->second;
      new_p = by_key_.at({modality.name(), new_cluster});
      if (old_p == new_p) continue;
      loc->second = new_p;
    }
    // One commit version covers the pair, so any snapshot sees the vector
    // in exactly one partition.
    Version v = registry_.next_version();
    DeltaRecord ins;
    ins.id = id;
    ins.op = DeltaOp::Insert;
    ins.embedding = std::move(embedding);
    ins.version = v;
    ins.partition = new_p;
    DeltaRecord del;
    del.id = id;
    del.op = DeltaOp::Delete;
    del.version = v;
    del.partition = old_p;
    if (log_attached_()) {
      log_.append(ins);
      log_.append(del);
    }
    {
      std::shared_lock topo(topo_mu_);
      Partition& np = *parts_[new_p];
      std::unique_lock nd(np.data_mu);
      np.delta.append(ins);
    }
    {
      std::shared_lock topo(topo_mu_);
      Partition& op = *parts_[old_p];
      std::unique_lock od(op.data_mu);
      op.delta.append(del);
    }
  }

  // Refit counts reflect the post-migration distribution.
  {
    std::unique_lock topo(topo_mu_);
    PartitionModel& model = models_[modality.name()];
    std::fill(model.assignment_counts.begin(), model.assignment_counts.end(),
              0);
    for (const auto& [id, p] : locator_) {
      const Partition& part = *parts_[p];
      if (part.info.modality == modality)
        model.assignment_counts[part.info.cluster]++;
    }
  }
}

void PartitionedVectorStore::requantize_partition(PartitionId p,
                                                  QuantBits bits) {
  std::shared_lock topo(topo_mu_);
  if (p >= parts_.size()) throw UnknownPartition(std::to_string(p));
  Partition& part = *parts_[p];
  std::lock_guard merge_window(part.vacuum_mu);
  std::unique_lock data(part.data_mu);
  part.stable.requantize(bits);
}

void PartitionedVectorStore::requantize_all(QuantBits bits) {
  std::vector<PartitionId> all;
  {
    std::shared_lock topo(topo_mu_);
    for (const auto& part : parts_) all.push_back(part->info.id);
  }
  for (PartitionId p : all) requantize_partition(p, bits);
  config_.quant = bits;
}

std::vector<PartitionInfo> PartitionedVectorStore::partitions() const {
  std::shared_lock topo(topo_mu_);
  std::vector<PartitionInfo> out;
  out.reserve(parts_.size());
  for (const auto& part : parts_) out.push_back(part->info);
  return out;
}

std::uint64_t PartitionedVectorStore::live_vector_count(
    const std::optional<Modality>& modality) const {
  std::shared_lock topo(topo_mu_);
  if (!modality.has_value()) return locator_.size();
  std::uint64_t count = 0;
  for (const auto& [id, p] : locator_)
    if (parts_[p]->info.modality == *modality || !config_.partitioning) ++count;
  return count;
}

std::uint64_t PartitionedVectorStore::delta_record_count() const {
  std::shared_lock topo(topo_mu_);
  std::uint64_t count = 0;
  for (const auto& part : parts_) {
    std::shared_lock data(part->data_mu);
    count += part->delta.size();
  }
  return count;
}

std::size_t PartitionedVectorStore::embedding_payload_bytes() const {
  std::shared_lock topo(topo_mu_);
  std::size_t bytes = 0;
  for (const auto& part : parts_) {
    std::shared_lock data(part->data_mu);
    bytes += part->stable.payload_bytes();
    for (const auto& [v, rec] : part->delta.records())
      if (rec.embedding.has_value())
        bytes += rec.embedding->size() * sizeof(float);
  }
  return bytes;
}

std::vector<std::pair<NodeId, std::vector<float>>>
PartitionedVectorStore::logical_entries(
    const SnapshotRef& snapshot, const std::optional<Modality>& modality) const {
  const Version hw = snapshot->high_water;
  std::shared_lock topo(topo_mu_);
  std::vector<std::pair<NodeId, std::vector<float>>> out;
  for (PartitionId p : target_partitions(modality)) {
    const Partition& part = *parts_[p];
    std::shared_lock data(part.data_mu);
    auto visible = part.delta.visible_map(hw);
    part.stable.for_each_live([&](NodeId id, std::uint32_t slot) {
      if (visible.count(id)) return;
      auto vf = part.visible_from.find(id);
      if (vf != part.visible_from.end() && vf->second > hw) return;
      out.emplace_back(id, part.stable.arena().get(slot));
    });
    for (const auto& [id, rec] : visible)
      if (rec->op != DeltaOp::Delete) out.emplace_back(id, *rec->embedding);
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

std::string PartitionedVectorStore::save(const std::string& dir) const {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoFailure("cannot create " + dir + ": " + ec.message());

  std::shared_lock topo(topo_mu_);
  nlohmann::json state;
  state["committed"] = registry_.committed();
  state["partitions"] = nlohmann::json::array();
  std::vector<DeltaRecord> pending;
  for (const auto& part : parts_) {
    std::shared_lock data(part->data_mu);
    nlohmann::json pj;
    pj["id"] = part->info.id;
    pj["modality"] = part->info.modality.name();
    pj["cluster"] = part->info.cluster;
    pj["dim"] = part->info.dim;
    state["partitions"].push_back(pj);
    part->stable.save(dir + "/p" + std::to_string(part->info.id) + ".hnsw");
    for (const auto& [v, rec] : part->delta.records()) pending.push_back(rec);
  }
  nlohmann::json models = nlohmann::json::object();
  for (const auto& [name, model] : models_)
    models[name] = nlohmann::json::parse(model.to_json());
  state["models"] = models;

  std::sort(pending.begin(), pending.end(),
            [](const DeltaRecord& a, const DeltaRecord& b) {
              return a.version < b.version;
            });
  DeltaLog(dir + "/delta.log").rewrite(pending);
  return state.dump();
}

std::unique_ptr<PartitionedVectorStore> PartitionedVectorStore::load(
    const std::string& dir, const std::string& state_json,
    VectorStoreConfig config) {
  auto store_ptr = std::make_unique<PartitionedVectorStore>(std::move(config));
  PartitionedVectorStore& store = *store_ptr;
  nlohmann::json state = nlohmann::json::parse(state_json);

  for (const auto& pj : state.at("partitions")) {
    auto part = std::make_unique<Partition>();
    part->info.id = pj.at("id").get<PartitionId>();
    part->info.modality =
        Modality::from_name(pj.at("modality").get<std::string>());
    part->info.cluster = pj.at("cluster").get<std::uint32_t>();
    part->info.dim = pj.at("dim").get<std::uint32_t>();
    part->stable =
        HnswIndex::load(dir + "/p" + std::to_string(part->info.id) + ".hnsw");
    if (part->info.id != store.parts_.size())
      throw FormatVersionMismatch("partition ids must be dense");
    const std::string key = store.config_.partitioning
                                ? part->info.modality.name()
                                : std::string(kSharedKey);
    store.by_key_[{key, part->info.cluster}] = part->info.id;
    part->stable.for_each_live([&](NodeId id, std::uint32_t) {
      store.locator_[id] = part->info.id;
    });
    store.parts_.push_back(std::move(part));
  }
  for (const auto& [name, mj] : state.at("models").items())
    store.models_[name] = PartitionModel::from_json(mj.dump());

  Version max_version = state.at("committed").get<Version>();
  store.log_ = DeltaLog(dir + "/delta.log");
  for (DeltaRecord& rec : store.log_.replay()) {
    max_version = std::max(max_version, rec.version);
    if (rec.partition >= store.parts_.size())
      throw FormatVersionMismatch("delta record for unknown partition");
    Partition& part = *store.parts_[rec.partition];
    switch (rec.op) {
      case DeltaOp::Insert:
      case DeltaOp::Update:
        store.locator_[rec.id] = rec.partition;
        break;
      case DeltaOp::Delete:
        store.locator_.erase(rec.id);
        break;
    }
    part.delta.append(std::move(rec));
  }
  store.registry_.restore_committed(max_version);
  return store_ptr;
}

}  // namespace hmgi
