// Copyright 2026 The RIM Authors.
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

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "rim/errors.hpp"

namespace rim::io {

static_assert(std::endian::native == std::endian::little,
              "binary snapshots are written little-endian");

template <typename T>
void Write(std::ostream& out, const T& value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T Read(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ContractViolation("truncated binary stream");
  return value;
}

inline void WriteDoubles(std::ostream& out, const double* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(n * sizeof(double)));
}

inline void ReadDoubles(std::istream& in, double* data, std::size_t n) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw ContractViolation("truncated binary stream");
}

// Every snapshot starts with a 4-byte magic tag followed by a u32 version.
inline void WriteHeader(std::ostream& out, const char (&magic)[5], std::uint32_t version) {
  out.write(magic, 4);
  Write<std::uint32_t>(out, version);
}

inline std::uint32_t ReadHeader(std::istream& in, const char (&magic)[5]) {
  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, magic, 4) != 0) {
    throw ContractViolation(std::string("bad magic header, expected ") + magic);
  }
  return Read<std::uint32_t>(in);
}

}  // namespace rim::io
