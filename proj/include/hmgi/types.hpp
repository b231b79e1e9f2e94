#pragma once
// Shared domain vocabulary: ids, modalities, property values, search hits.

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace hmgi {

using NodeId = std::uint64_t;
using Version = std::uint64_t;
using PartitionId = std::uint32_t;

inline constexpr NodeId kInvalidNode = std::numeric_limits<NodeId>::max();
inline constexpr PartitionId kInvalidPartition =
    std::numeric_limits<PartitionId>::max();

enum class ModalityKind : std::uint8_t { Text, Image, Audio, Video, Other };

// A modality is identified by its canonical lowercase name; the four
// well-known names map onto fixed kinds, anything else is Other.
class Modality {
 public:
  Modality() : kind_(ModalityKind::Other), name_("other") {}

  static Modality text() { return Modality(ModalityKind::Text, "text"); }
  static Modality image() { return Modality(ModalityKind::Image, "image"); }
  static Modality audio() { return Modality(ModalityKind::Audio, "audio"); }
  static Modality video() { return Modality(ModalityKind::Video, "video"); }
  static Modality other(std::string name) {
    return Modality(ModalityKind::Other, std::move(name));
  }

  static Modality from_name(const std::string& name) {
    if (name == "text") return text();
    if (name == "image") return image();
    if (name == "audio") return audio();
    if (name == "video") return video();
    return other(name);
  }

  ModalityKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

  bool operator==(const Modality& o) const noexcept { return name_ == o.name_; }
  bool operator!=(const Modality& o) const noexcept { return name_ != o.name_; }
  bool operator<(const Modality& o) const noexcept { return name_ < o.name_; }

 private:
  Modality(ModalityKind kind, std::string name)
      : kind_(kind), name_(std::move(name)) {}

  ModalityKind kind_;
  std::string name_;
};

using PropertyValue = std::variant<bool, std::int64_t, double, std::string>;

// Slot value of an embedding still waiting in the delta; the stable slot
// is assigned when the record merges.
inline constexpr std::uint32_t kDeltaSlot = std::numeric_limits<std::uint32_t>::max();

// Where a node's embedding lives: the owning partition and the slot inside
// that partition's vector arena (kDeltaSlot while delta-resident).
struct EmbeddingRef {
  PartitionId partition = kInvalidPartition;
  std::uint32_t slot = kDeltaSlot;

  bool operator==(const EmbeddingRef&) const = default;
};

// One vector-search result. distance is cosine distance in [0, 2];
// result lists are sorted ascending by distance, ties by id.
struct SearchHit {
  NodeId id = kInvalidNode;
  float distance = 0.0f;
  PartitionId partition = kInvalidPartition;

  bool operator==(const SearchHit&) const = default;
};

inline bool hit_order(const SearchHit& a, const SearchHit& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.id < b.id;
}

}  // namespace hmgi

template <>
struct std::hash<hmgi::Modality> {
  std::size_t operator()(const hmgi::Modality& m) const noexcept {
    return std::hash<std::string>{}(m.name());
  }
};
