#pragma once
// Little-endian sectioned snapshot container.
//
// Layout:
//   magic (4 bytes) | format_version u32 | section_count u32
//   per section: id u32 | payload_len u64 | payload | crc32 u32
//
// The CRC covers the payload only. Truncated or corrupted files decode to
// FormatVersionMismatch / ChecksumMismatch, never undefined behaviour.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <zlib.h>

#include "hmgi/errors.hpp"

namespace hmgi {

inline std::uint32_t crc32_bytes(const void* data, std::size_t len) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, static_cast<const Bytef*>(data), static_cast<uInt>(len)));
}

class BinaryWriter {
 public:
  void put_u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void put_u32(std::uint32_t v) { put_le(v); }
  void put_u64(std::uint64_t v) { put_le(v); }
  void put_i64(std::int64_t v) { put_le(static_cast<std::uint64_t>(v)); }
  void put_f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_le(bits);
  }
  void put_f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_le(bits);
  }
  void put_string(const std::string& s) {
    put_u64(s.size());
    buf_.append(s);
  }
  void put_bytes(const void* data, std::size_t len) {
    buf_.append(static_cast<const char*>(data), len);
  }

  const std::string& bytes() const noexcept { return buf_; }

 private:
  template <typename T>
  void put_le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
      buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }

  std::string buf_;
};

class BinaryReader {
 public:
  BinaryReader(const char* data, std::size_t len) : data_(data), len_(len) {}
  explicit BinaryReader(const std::string& s) : data_(s.data()), len_(s.size()) {}

  std::uint8_t get_u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t get_u32() { return get_le<std::uint32_t>(); }
  std::uint64_t get_u64() { return get_le<std::uint64_t>(); }
  std::int64_t get_i64() { return static_cast<std::int64_t>(get_le<std::uint64_t>()); }
  float get_f32() {
    std::uint32_t bits = get_le<std::uint32_t>();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  double get_f64() {
    std::uint64_t bits = get_le<std::uint64_t>();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string get_string() {
    std::uint64_t n = get_u64();
    const char* p = take(n);
    return std::string(p, n);
  }
  void get_bytes(void* out, std::size_t len) { std::memcpy(out, take(len), len); }

  std::size_t remaining() const noexcept { return len_ - pos_; }

 private:
  const char* take(std::size_t n) {
    if (pos_ + n > len_)
      throw FormatVersionMismatch("section payload shorter than expected");
    const char* p = data_ + pos_;
    pos_ += n;
    return p;
  }

  template <typename T>
  T get_le() {
    const char* p = take(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
  }

  const char* data_;
  std::size_t len_;
  std::size_t pos_ = 0;
};

// Assembles a snapshot file from named sections and writes it atomically
// (write to temp, rename over target).
class SnapshotWriter {
 public:
  SnapshotWriter(std::string magic, std::uint32_t format_version)
      : magic_(std::move(magic)), version_(format_version) {}

  void add_section(std::uint32_t id, const std::string& payload) {
    sections_.emplace_back(id, payload);
  }
  void add_section(std::uint32_t id, const BinaryWriter& w) {
    sections_.emplace_back(id, w.bytes());
  }

  void write_file(const std::string& path) const {
    BinaryWriter out;
    out.put_bytes(magic_.data(), magic_.size());
    out.put_u32(version_);
    out.put_u32(static_cast<std::uint32_t>(sections_.size()));
    for (const auto& [id, payload] : sections_) {
      out.put_u32(id);
      out.put_u64(payload.size());
      out.put_bytes(payload.data(), payload.size());
      out.put_u32(crc32_bytes(payload.data(), payload.size()));
    }
    const std::string tmp = path + ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw IoFailure("cannot open " + tmp + " for writing");
      f.write(out.bytes().data(),
              static_cast<std::streamsize>(out.bytes().size()));
      if (!f) throw IoFailure("short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
      throw IoFailure("cannot rename " + tmp + " to " + path);
  }

 private:
  std::string magic_;
  std::uint32_t version_;
  std::vector<std::pair<std::uint32_t, std::string>> sections_;
};

// Loads and CRC-verifies all sections of a snapshot file.
class SnapshotReader {
 public:
  SnapshotReader(const std::string& path, const std::string& magic,
                 std::uint32_t expected_version) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoFailure("cannot open " + path);
    std::string raw((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
    if (raw.size() < magic.size() + 8)
      throw FormatVersionMismatch("file too short for header: " + path);
    if (raw.compare(0, magic.size(), magic) != 0)
      throw FormatVersionMismatch("bad magic in " + path);
    BinaryReader r(raw.data() + magic.size(), raw.size() - magic.size());
    std::uint32_t version = r.get_u32();
    if (version != expected_version)
      throw FormatVersionMismatch("format version " + std::to_string(version) +
                                  ", expected " +
                                  std::to_string(expected_version));
    std::uint32_t count = r.get_u32();
    for (std::uint32_t i = 0; i < count; ++i) {
      std::uint32_t id = r.get_u32();
      std::uint64_t len = r.get_u64();
      if (len > r.remaining())
        throw ChecksumMismatch("truncated section " + std::to_string(id));
      std::string payload(len, '\0');
      if (len > 0) r.get_bytes(payload.data(), len);
      std::uint32_t crc = r.get_u32();
      if (crc != crc32_bytes(payload.data(), payload.size()))
        throw ChecksumMismatch("section " + std::to_string(id) + " in " + path);
      sections_[id] = std::move(payload);
    }
  }

  bool has_section(std::uint32_t id) const { return sections_.count(id) > 0; }

  const std::string& section(std::uint32_t id) const {
    auto it = sections_.find(id);
    if (it == sections_.end())
      throw FormatVersionMismatch("missing section " + std::to_string(id));
    return it->second;
  }

 private:
  std::map<std::uint32_t, std::string> sections_;
};

}  // namespace hmgi
