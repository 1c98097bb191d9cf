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

#ifndef SWE_CONFIG_H_
#define SWE_CONFIG_H_

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace swe {

// Flat "key = value" file. Blank lines and text after '#' are ignored.
// Keys may repeat; entries keep file order.
class KeyValueFile {
 public:
  KeyValueFile() = default;

  static KeyValueFile Parse(std::string_view text, std::string_view origin = "<string>");
  static KeyValueFile Load(const std::string &path);

  const std::vector<std::pair<std::string, std::string>> &entries() const {
    return entries_;
  }
  bool Has(std::string_view key) const;
  // Last value for the key.
  std::optional<std::string> Get(std::string_view key) const;
  std::vector<std::string> GetAll(std::string_view key) const;

  double GetDouble(std::string_view key, double fallback) const;
  long long GetInt(std::string_view key, long long fallback) const;

  // Throws DataError naming the first key not in `allowed`.
  void RequireKnownKeys(const std::set<std::string, std::less<>> &allowed) const;

  void Set(std::string key, std::string value);

  // Canonical "key=value\n" serialization, used for config hashes.
  std::string Serialize() const;

 private:
  std::string origin_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

double ParseDouble(std::string_view text, std::string_view what);
long long ParseInt(std::string_view text, std::string_view what);

}  // namespace swe

#endif  // SWE_CONFIG_H_
