#pragma once
// Dataset interchange: fvecs/bvecs vector files and line-delimited JSON
// graph records.
//
//   fvecs: repeated [int32 d][d x float32], little endian
//   bvecs: repeated [int32 d][d x uint8]
//   jsonl: {"kind":"node","id":...,"labels":[...],"modality":"text",
//           "embedding":[...],"props":{...}}
//          {"kind":"edge","src":...,"dst":...,"type":"...","weight":...}

#include <cstdint>
#include <string>
#include <vector>

#include "hmgi/engine.hpp"

namespace hmgi::bench {

std::vector<std::vector<float>> load_fvecs(const std::string& path);
std::vector<std::vector<std::uint8_t>> load_bvecs(const std::string& path);

void write_fvecs(const std::string& path,
                 const std::vector<std::vector<float>>& vectors);
void write_bvecs(const std::string& path,
                 const std::vector<std::vector<std::uint8_t>>& vectors);

struct IngestSummary {
  std::uint64_t nodes = 0;
  std::uint64_t edges = 0;
  std::uint64_t modalities_registered = 0;
};

// Replays node and edge records into the engine. Node records must appear
// in ascending id order matching the engine's id counter. Registers each
// modality's dimension on first sight.
IngestSummary load_graph_jsonl(const std::string& path, HmgiEngine& engine);

}  // namespace hmgi::bench
