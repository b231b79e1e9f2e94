#include "hmgi/quantizer.hpp"

#include <algorithm>
#include <cmath>

namespace hmgi {

std::pair<std::vector<std::uint32_t>, QuantizationDescriptor> quantize(
    std::span<const float> e, QuantBits bits) {
  if (e.empty()) throw NonFiniteInput("empty vector");
  float lo = e[0];
  float hi = e[0];
  for (float x : e) {
    if (!std::isfinite(x)) throw NonFiniteInput("component " + std::to_string(x));
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  QuantizationDescriptor desc{bits, lo, hi};
  std::vector<std::uint32_t> q(e.size(), 0u);
  if (bits == QuantBits::None || hi == lo) return {std::move(q), desc};

  const double L = quant_levels(bits);
  const double range = static_cast<double>(hi) - static_cast<double>(lo);
  for (std::size_t i = 0; i < e.size(); ++i) {
    double t = (static_cast<double>(e[i]) - lo) / range;
    auto code = static_cast<std::int64_t>(std::floor(L * t));
    q[i] = static_cast<std::uint32_t>(
        std::clamp<std::int64_t>(code, 0, static_cast<std::int64_t>(L)));
  }
  return {std::move(q), desc};
}

std::vector<float> dequantize(std::span<const std::uint32_t> q,
                              const QuantizationDescriptor& desc) {
  std::vector<float> out(q.size(), desc.min_v);
  if (desc.bits == QuantBits::None || desc.max_v == desc.min_v) return out;
  const double L = quant_levels(desc.bits);
  const double range = static_cast<double>(desc.max_v) - desc.min_v;
  for (std::size_t i = 0; i < q.size(); ++i)
    out[i] = static_cast<float>(desc.min_v + q[i] * range / L);
  return out;
}

QuantBits select_bits(const MemoryPolicy& policy, double load) {
  if (load > 0.95) return QuantBits::B4;
  if (load > policy.threshold_fraction) return QuantBits::B8;
  return QuantBits::B16;
}

}  // namespace hmgi
