#pragma once
// Slot-addressed embedding storage for one partition. Stores either raw
// fp32 or fixed-point codes with a per-vector (min, max) descriptor.
// Distances are always computed on dequantized values.

#include <cstdint>
#include <span>
#include <vector>

#include "hmgi/binary_io.hpp"
#include "hmgi/quantizer.hpp"

namespace hmgi {

class VectorArena {
 public:
  VectorArena() = default;
  VectorArena(std::uint32_t dim, QuantBits bits) : dim_(dim), bits_(bits) {}

  std::uint32_t dim() const noexcept { return dim_; }
  QuantBits bits() const noexcept { return bits_; }
  std::uint32_t size() const noexcept { return count_; }

  std::uint32_t append(std::span<const float> v);

  // Dequantized copy of a stored vector.
  std::vector<float> get(std::uint32_t slot) const;
  void decode(std::uint32_t slot, float* out) const;

  // Inner product of a stored vector against a query of length dim().
  float dot_to(std::uint32_t slot, const float* query) const;

  // Embedding payload plus per-vector descriptors, in bytes.
  std::size_t payload_bytes() const noexcept {
    return data_.size() + descriptors_.size() * sizeof(QuantizationDescriptor);
  }

  // Re-encodes every stored vector at the new width.
  void requantize(QuantBits new_bits);

  void serialize(BinaryWriter& w) const;
  static VectorArena deserialize(BinaryReader& r);

 private:
  std::size_t stride() const noexcept;
  void encode_into(std::span<const float> v, std::uint8_t* dst,
                   QuantizationDescriptor* desc) const;

  std::uint32_t dim_ = 0;
  QuantBits bits_ = QuantBits::None;
  std::uint32_t count_ = 0;
  std::vector<std::uint8_t> data_;
  std::vector<QuantizationDescriptor> descriptors_;  // empty in raw mode
};

}  // namespace hmgi
