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

#ifndef SWE_BASE_H_
#define SWE_BASE_H_

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace swe {

// Row-major dense matrix used for every embedding-shaped quantity.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Base class of all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// A file was readable but its contents violate the documented format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Arguments or data violate an operation's preconditions.
class DataError : public Error {
 public:
  using Error::Error;
};

// Warnings go through a replaceable sink (stderr by default).
using WarningSink = std::function<void(std::string_view)>;
void SetWarningSink(WarningSink sink);
void Warn(std::string_view message);

// 64-bit FNV-1a, used for provenance hashes.
uint64_t Fnv1a64(std::string_view bytes, uint64_t seed = 0xcbf29ce484222325ULL);
uint64_t HashFile(const std::string &path);
std::string HexDigest(uint64_t hash);

}  // namespace swe

#endif  // SWE_BASE_H_
