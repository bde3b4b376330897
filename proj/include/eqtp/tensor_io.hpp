// Copyright 2026 The eqtp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian binary framing and the raw float32 tensor format:
//   "EQTF" | u32 rank | u32 dims[rank] | float32 data (row-major)

#ifndef EQTP_TENSOR_IO_HPP_
#define EQTP_TENSOR_IO_HPP_

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqtp/feature_field.hpp"

namespace eqtp {

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, uint64_t offset)
      : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}
  uint64_t offset() const { return offset_; }

 private:
  uint64_t offset_;
};

class ByteWriter {
 public:
  void Bytes(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  template <typename T>
  void Le(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    uint8_t b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    Bytes(b, sizeof(T));
  }
  void U32(uint32_t v) { Le(v); }
  void U64(uint64_t v) { Le(v); }
  void F32(float v) { Le(v); }
  void F64(double v) { Le(v); }
  void Magic(const char (&m)[5]) { Bytes(m, 4); }
  void String(const std::string& s) {
    U32(static_cast<uint32_t>(s.size()));
    Bytes(s.data(), s.size());
  }

  const std::vector<uint8_t>& buffer() const { return buf_; }
  size_t size() const { return buf_.size(); }

  void WriteFile(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
  }

 private:
  std::vector<uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<uint8_t> buf) : buf_(std::move(buf)) {}

  static ByteReader FromFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return ByteReader(std::move(buf));
  }

  uint64_t offset() const { return pos_; }
  bool AtEnd() const { return pos_ == buf_.size(); }
  size_t remaining() const { return buf_.size() - pos_; }

  void Bytes(void* p, size_t n) {
    if (n > remaining()) throw FormatError("unexpected end of data", pos_);
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  template <typename T>
  T Le() {
    uint8_t b[sizeof(T)];
    Bytes(b, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
  uint32_t U32() { return Le<uint32_t>(); }
  uint64_t U64() { return Le<uint64_t>(); }
  float F32() { return Le<float>(); }
  double F64() { return Le<double>(); }
  void ExpectMagic(const char (&m)[5]) {
    const uint64_t at = pos_;
    char got[4];
    Bytes(got, 4);
    if (std::memcmp(got, m, 4) != 0) throw FormatError(std::string("bad magic, expected ") + m, at);
  }
  std::string String(size_t max_len = 1 << 20) {
    const uint64_t at = pos_;
    const uint32_t n = U32();
    if (n > max_len || n > remaining()) throw FormatError("string length out of range", at);
    std::string s(n, '\0');
    Bytes(s.data(), n);
    return s;
  }

 private:
  std::vector<uint8_t> buf_;
  size_t pos_ = 0;
};

struct RawTensor {
  std::vector<uint32_t> dims;
  std::vector<float> data;

  size_t NumElements() const {
    size_t n = 1;
    for (uint32_t d : dims) n *= d;
    return n;
  }
};

inline void WriteRawTensor(ByteWriter& w, const RawTensor& t) {
  if (t.NumElements() != t.data.size()) throw std::invalid_argument("raw tensor size mismatch");
  w.Magic("EQTF");
  w.U32(static_cast<uint32_t>(t.dims.size()));
  for (uint32_t d : t.dims) w.U32(d);
  for (float v : t.data) w.F32(v);
}

inline RawTensor ReadRawTensor(ByteReader& r) {
  r.ExpectMagic("EQTF");
  const uint64_t rank_at = r.offset();
  const uint32_t rank = r.U32();
  if (rank > 8) throw FormatError("tensor rank " + std::to_string(rank) + " too large", rank_at);
  RawTensor t;
  uint64_t n = 1;
  for (uint32_t i = 0; i < rank; ++i) {
    t.dims.push_back(r.U32());
    n *= t.dims.back();
  }
  if (n * 4 > r.remaining()) throw FormatError("tensor data truncated", r.offset());
  t.data.resize(n);
  for (auto& v : t.data) v = r.F32();
  return t;
}

inline void SaveRawTensor(const std::string& path, const RawTensor& t) {
  ByteWriter w;
  WriteRawTensor(w, t);
  w.WriteFile(path);
}

inline RawTensor LoadRawTensor(const std::string& path) {
  ByteReader r = ByteReader::FromFile(path);
  RawTensor t = ReadRawTensor(r);
  if (!r.AtEnd()) throw FormatError("trailing bytes after tensor", r.offset());
  return t;
}

// [channels, height, width] float32.
inline RawTensor ToRawTensor(const FeatureField& f) {
  RawTensor t;
  t.dims = {static_cast<uint32_t>(f.channels()), static_cast<uint32_t>(f.height()),
            static_cast<uint32_t>(f.width())};
  t.data.assign(f.data().begin(), f.data().end());
  return t;
}

inline FeatureField FromRawTensor(const RawTensor& t, double pixel_pitch = 1.0) {
  if (t.dims.size() != 3) throw std::invalid_argument("feature field tensors have rank 3");
  FeatureField f = FeatureField::Scalar(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]),
                                        static_cast<int>(t.dims[2]), pixel_pitch);
  std::copy(t.data.begin(), t.data.end(), f.data().begin());
  return f;
}

}  // namespace eqtp

#endif  // EQTP_TENSOR_IO_HPP_
