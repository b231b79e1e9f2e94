#include "hmgi/vector_arena.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace hmgi {

std::size_t VectorArena::stride() const noexcept {
  switch (bits_) {
    case QuantBits::None: return std::size_t{4} * dim_;
    case QuantBits::B16: return std::size_t{2} * dim_;
    case QuantBits::B8: return dim_;
    case QuantBits::B4: return (dim_ + 1) / 2;
  }
  return 0;
}

void VectorArena::encode_into(std::span<const float> v, std::uint8_t* dst,
                              QuantizationDescriptor* desc) const {
  if (bits_ == QuantBits::None) {
    std::memcpy(dst, v.data(), std::size_t{4} * dim_);
    return;
  }
  auto [codes, d] = quantize(v, bits_);
  *desc = d;
  switch (bits_) {
    case QuantBits::B16:
      for (std::uint32_t i = 0; i < dim_; ++i) {
        dst[2 * i] = static_cast<std::uint8_t>(codes[i] & 0xff);
        dst[2 * i + 1] = static_cast<std::uint8_t>((codes[i] >> 8) & 0xff);
      }
      break;
    case QuantBits::B8:
      for (std::uint32_t i = 0; i < dim_; ++i)
        dst[i] = static_cast<std::uint8_t>(codes[i]);
      break;
    case QuantBits::B4:
      for (std::uint32_t i = 0; i < dim_; ++i) {
        std::uint8_t nib = static_cast<std::uint8_t>(codes[i] & 0x0f);
        if (i % 2 == 0)
          dst[i / 2] = nib;
        else
          dst[i / 2] |= static_cast<std::uint8_t>(nib << 4);
      }
      break;
    default:
      break;
  }
}

std::uint32_t VectorArena::append(std::span<const float> v) {
  if (v.size() != dim_)
    throw DimensionMismatch("vector length " + std::to_string(v.size()) +
                            " != arena dim " + std::to_string(dim_));
  const std::size_t s = stride();
  data_.resize(data_.size() + s, 0);
  QuantizationDescriptor desc;
  encode_into(v, data_.data() + std::size_t{count_} * s, &desc);
  if (bits_ != QuantBits::None) descriptors_.push_back(desc);
  return count_++;
}

void VectorArena::decode(std::uint32_t slot, float* out) const {
  const std::uint8_t* src = data_.data() + std::size_t{slot} * stride();
  if (bits_ == QuantBits::None) {
    std::memcpy(out, src, std::size_t{4} * dim_);
    return;
  }
  const QuantizationDescriptor& d = descriptors_[slot];
  const float range = d.max_v - d.min_v;
  const float scale = range == 0.0f ? 0.0f : range / quant_levels(bits_);
  switch (bits_) {
    case QuantBits::B16:
      for (std::uint32_t i = 0; i < dim_; ++i) {
        std::uint32_t code = src[2 * i] | (std::uint32_t{src[2 * i + 1]} << 8);
        out[i] = d.min_v + code * scale;
      }
      break;
    case QuantBits::B8:
      for (std::uint32_t i = 0; i < dim_; ++i) out[i] = d.min_v + src[i] * scale;
      break;
    case QuantBits::B4:
      for (std::uint32_t i = 0; i < dim_; ++i) {
        std::uint8_t code = (i % 2 == 0) ? (src[i / 2] & 0x0f) : (src[i / 2] >> 4);
        out[i] = d.min_v + code * scale;
      }
      break;
    default:
      break;
  }
}

std::vector<float> VectorArena::get(std::uint32_t slot) const {
  std::vector<float> out(dim_);
  decode(slot, out.data());
  return out;
}

float VectorArena::dot_to(std::uint32_t slot, const float* query) const {
  const std::uint8_t* src = data_.data() + std::size_t{slot} * stride();
  double acc = 0.0;
  if (bits_ == QuantBits::None) {
    const float* v = reinterpret_cast<const float*>(src);
    for (std::uint32_t i = 0; i < dim_; ++i) acc += double{v[i]} * query[i];
    return static_cast<float>(acc);
  }
  const QuantizationDescriptor& d = descriptors_[slot];
  const float range = d.max_v - d.min_v;
  const float scale = range == 0.0f ? 0.0f : range / quant_levels(bits_);
  switch (bits_) {
    case QuantBits::B16:
      for (std::uint32_t i = 0; i < dim_; ++i) {
        std::uint32_t code = src[2 * i] | (std::uint32_t{src[2 * i + 1]} << 8);
        acc += double{d.min_v + code * scale} * query[i];
      }
      break;
    case QuantBits::B8:
      for (std::uint32_t i = 0; i < dim_; ++i)
        acc += double{d.min_v + src[i] * scale} * query[i];
      break;
    case QuantBits::B4:
      for (std::uint32_t i = 0; i < dim_; ++i) {
        std::uint8_t code = (i % 2 == 0) ? (src[i / 2] & 0x0f) : (src[i / 2] >> 4);
        acc += double{d.min_v + code * scale} * query[i];
      }
      break;
    default:
      break;
  }
  return static_cast<float>(acc);
}

void VectorArena::requantize(QuantBits new_bits) {
  if (new_bits == bits_) return;
  std::vector<float> scratch(dim_);
  VectorArena next(dim_, new_bits);
  next.data_.reserve(std::size_t{count_} * next.stride());
  for (std::uint32_t slot = 0; slot < count_; ++slot) {
    decode(slot, scratch.data());
    next.append(scratch);
  }
  *this = std::move(next);
}

void VectorArena::serialize(BinaryWriter& w) const {
  w.put_u32(dim_);
  w.put_u8(static_cast<std::uint8_t>(bits_));
  w.put_u32(count_);
  w.put_u64(data_.size());
  w.put_bytes(data_.data(), data_.size());
  w.put_u64(descriptors_.size());
  for (const QuantizationDescriptor& d : descriptors_) {
    w.put_f32(d.min_v);
    w.put_f32(d.max_v);
  }
}

VectorArena VectorArena::deserialize(BinaryReader& r) {
  VectorArena a;
  a.dim_ = r.get_u32();
  a.bits_ = static_cast<QuantBits>(r.get_u8());
  a.count_ = r.get_u32();
  std::uint64_t n = r.get_u64();
  a.data_.resize(n);
  if (n > 0) r.get_bytes(a.data_.data(), n);
  std::uint64_t nd = r.get_u64();
  a.descriptors_.resize(nd);
  for (std::uint64_t i = 0; i < nd; ++i) {
    a.descriptors_[i].bits = a.bits_;
    a.descriptors_[i].min_v = r.get_f32();
    a.descriptors_[i].max_v = r.get_f32();
  }
  return a;
}

}  // namespace hmgi
