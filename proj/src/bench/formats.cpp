#include "hmgi/bench/formats.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace hmgi::bench {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

std::int32_t read_i32(const char* p) {
  std::int32_t v;
  std::memcpy(&v, p, 4);
  return v;  // x86-64 little endian matches the format
}

}  // namespace

std::vector<std::vector<float>> load_fvecs(const std::string& path) {
  std::string raw = slurp(path);
  std::vector<std::vector<float>> out;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    if (pos + 4 > raw.size())
      throw MalformedRecord(pos, "truncated dimension header");
    std::int32_t d = read_i32(raw.data() + pos);
    if (d <= 0 || pos + 4 + std::size_t(d) * 4 > raw.size())
      throw MalformedRecord(pos, "record dimension " + std::to_string(d) +
                                     " exceeds file");
    std::vector<float> v(d);
    std::memcpy(v.data(), raw.data() + pos + 4, std::size_t(d) * 4);
    out.push_back(std::move(v));
    pos += 4 + std::size_t(d) * 4;
  }
  return out;
}

std::vector<std::vector<std::uint8_t>> load_bvecs(const std::string& path) {
  std::string raw = slurp(path);
  std::vector<std::vector<std::uint8_t>> out;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    if (pos + 4 > raw.size())
      throw MalformedRecord(pos, "truncated dimension header");
    std::int32_t d = read_i32(raw.data() + pos);
    if (d <= 0 || pos + 4 + std::size_t(d) > raw.size())
      throw MalformedRecord(pos, "record dimension " + std::to_string(d) +
                                     " exceeds file");
    std::vector<std::uint8_t> v(d);
    std::memcpy(v.data(), raw.data() + pos + 4, std::size_t(d));
    out.push_back(std::move(v));
    pos += 4 + std::size_t(d);
  }
  return out;
}

void write_fvecs(const std::string& path,
                 const std::vector<std::vector<float>>& vectors) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoFailure("cannot open " + path);
  for (const auto& v : vectors) {
    std::int32_t d = static_cast<std::int32_t>(v.size());
    f.write(reinterpret_cast<const char*>(&d), 4);
    f.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * 4));
  }
  if (!f) throw IoFailure("short write to " + path);
}

void write_bvecs(const std::string& path,
                 const std::vector<std::vector<std::uint8_t>>& vectors) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoFailure("cannot open " + path);
  for (const auto& v : vectors) {
    std::int32_t d = static_cast<std::int32_t>(v.size());
    f.write(reinterpret_cast<const char*>(&d), 4);
    f.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size()));
  }
  if (!f) throw IoFailure("short write to " + path);
}

IngestSummary load_graph_jsonl(const std::string& path, HmgiEngine& engine) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot open " + path);
  IngestSummary summary;
  std::string line;
  std::uint64_t offset = 0;
  std::set<std::string> seen_modalities;
  while (std::getline(f, line)) {
    const std::uint64_t line_offset = offset;
    offset += line.size() + 1;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw MalformedRecord(line_offset, "invalid JSON record");
    const std::string kind = j.value("kind", "");
    if (kind == "node") {
      Modality modality = Modality::from_name(j.value("modality", "text"));
      std::optional<std::vector<float>> embedding;
      if (j.contains("embedding") && !j.at("embedding").is_null()) {
        embedding = j.at("embedding").get<std::vector<float>>();
        if (seen_modalities.insert(modality.name()).second &&
            !engine.graph().modality_dim(modality).has_value())
          engine.register_modality(
              modality, static_cast<std::uint32_t>(embedding->size()));
      }
      std::set<std::string> labels;
      if (j.contains("labels"))
        for (const auto& l : j.at("labels")) labels.insert(l.get<std::string>());
      std::map<std::string, PropertyValue> props;
      if (j.contains("props")) {
        for (const auto& [key, value] : j.at("props").items()) {
          if (value.is_boolean())
            props[key] = value.get<bool>();
          else if (value.is_number_integer())
            props[key] = value.get<std::int64_t>();
          else if (value.is_number_float())
            props[key] = value.get<double>();
          else if (value.is_string())
            props[key] = value.get<std::string>();
          else
            throw MalformedRecord(line_offset, "unsupported property type");
        }
      }
      NodeId assigned = engine.add_node(std::move(labels), modality,
                                        std::move(embedding), std::move(props));
      if (j.contains("id") && j.at("id").get<NodeId>() != assigned)
        throw MalformedRecord(line_offset,
                              "node id " + std::to_string(j.at("id").get<NodeId>()) +
                                  " does not match assigned id " +
                                  std::to_string(assigned));
      ++summary.nodes;
    } else if (kind == "edge") {
      engine.add_edge(j.at("src").get<NodeId>(), j.at("dst").get<NodeId>(),
                      j.value("type", "RELATES"),
                      j.value("weight", 1.0f));
      ++summary.edges;
    } else {
      throw MalformedRecord(line_offset, "unknown record kind '" + kind + "'");
    }
  }
  summary.modalities_registered = seen_modalities.size();
  return summary;
}

}  // namespace hmgi::bench
