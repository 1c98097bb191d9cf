// Copyright 2026 The SWE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian primitive readers and writers shared by the binary formats.

#ifndef SWE_BINARY_IO_H_
#define SWE_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>

#include "swe/base.h"

namespace swe {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream *out) : out_(out) {}

  void Bytes(std::string_view bytes) {
    out_->write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  template <typename T>
  void Pod(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out_->write(buf, sizeof(T));
  }
  void U8(uint8_t v) { Pod(v); }
  void U32(uint32_t v) { Pod(v); }
  void U64(uint64_t v) { Pod(v); }
  void F32(float v) { Pod(v); }
  void F64(double v) { Pod(v); }
  // u32 byte length followed by the bytes.
  void String(std::string_view s) {
    U32(static_cast<uint32_t>(s.size()));
    Bytes(s);
  }
  void Metadata(const std::map<std::string, std::string> &kv) {
    U32(static_cast<uint32_t>(kv.size()));
    for (const auto &[k, v] : kv) {
      String(k);
      String(v);
    }
  }
  bool ok() const { return out_->good(); }

 private:
  std::ostream *out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream *in) : in_(in) {}

  void Bytes(char *dst, size_t n) {
    in_->read(dst, static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in_->gcount()) != n) throw FormatError("unexpected EOF");
  }
  std::string Bytes(size_t n) {
    std::string s(n, '\0');
    Bytes(s.data(), n);
    return s;
  }
  template <typename T>
  T Pod() {
    char buf[sizeof(T)];
    Bytes(buf, sizeof(T));
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
  }
  uint8_t U8() { return Pod<uint8_t>(); }
  uint32_t U32() { return Pod<uint32_t>(); }
  uint64_t U64() { return Pod<uint64_t>(); }
  float F32() { return Pod<float>(); }
  double F64() { return Pod<double>(); }
  std::string String() { return Bytes(U32()); }
  std::map<std::string, std::string> Metadata() {
    std::map<std::string, std::string> kv;
    const uint32_t n = U32();
    for (uint32_t i = 0; i < n; ++i) {
      std::string k = String();
      kv[std::move(k)] = String();
    }
    return kv;
  }
  // True when no bytes remain.
  bool AtEnd() {
    return in_->peek() == std::char_traits<char>::eof();
  }

 private:
  std::istream *in_;
};

}  // namespace swe

#endif  // SWE_BINARY_IO_H_
