#pragma once
// Fixed-point compression of stored embeddings. Per-vector min/max scaling:
//   q_i = floor(L * (e_i - min) / (max - min)),  L = 2^bits - 1
// Reconstruction ê_i = min + q_i * (max - min) / L is within (max - min)/L
// of the original component. Width is chosen from memory pressure.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hmgi/errors.hpp"

namespace hmgi {

enum class QuantBits : std::uint8_t { None = 0, B4 = 4, B8 = 8, B16 = 16 };

inline std::uint32_t quant_levels(QuantBits bits) {
  return bits == QuantBits::None ? 0u : (1u << static_cast<unsigned>(bits)) - 1u;
}

struct QuantizationDescriptor {
  QuantBits bits = QuantBits::None;
  float min_v = 0.0f;
  float max_v = 0.0f;

  bool operator==(const QuantizationDescriptor&) const = default;
};

// Integer codes in [0, L] plus the descriptor needed to reconstruct.
std::pair<std::vector<std::uint32_t>, QuantizationDescriptor> quantize(
    std::span<const float> e, QuantBits bits);

std::vector<float> dequantize(std::span<const std::uint32_t> q,
                              const QuantizationDescriptor& desc);

struct MemoryPolicy {
  double threshold_fraction = 0.80;
  // Reports current embedding-storage bytes / budget bytes.
  std::function<double()> probe;
};

// Width for a given load fraction: <= 0.80 keeps 16-bit, above the
// threshold drops to 8-bit, above 0.95 to 4-bit.
QuantBits select_bits(const MemoryPolicy& policy, double load);

// Applies select_bits with hysteresis: a width change takes effect only
// after two consecutive probes agree on the same new width.
class AdaptiveQuantController {
 public:
  explicit AdaptiveQuantController(MemoryPolicy policy,
                                   QuantBits initial = QuantBits::B16)
      : policy_(std::move(policy)), current_(initial) {}

  QuantBits current() const noexcept { return current_; }

  QuantBits observe(double load) {
    QuantBits want = select_bits(policy_, load);
    if (want == current_) {
      pending_ = QuantBits::None;
      return current_;
    }
    if (pending_ == want) {
      current_ = want;
      pending_ = QuantBits::None;
    } else {
      pending_ = want;
    }
    return current_;
  }

 private:
  MemoryPolicy policy_;
  QuantBits current_;
  QuantBits pending_ = QuantBits::None;
};

}  // namespace hmgi
