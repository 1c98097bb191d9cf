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

#include "swe/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "swe/base.h"

namespace swe {
namespace {

std::string_view Trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

KeyValueFile KeyValueFile::Parse(std::string_view text, std::string_view origin) {
  KeyValueFile kv;
  kv.origin_ = std::string(origin);
  size_t line_no = 0;
  while (!text.empty()) {
    const size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    if (const size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError(kv.origin_ + ":" + std::to_string(line_no) +
                        ": expected key=value, got '" + std::string(line) + "'");
    }
    std::string_view key = Trim(line.substr(0, eq));
    if (key.empty()) {
      throw FormatError(kv.origin_ + ":" + std::to_string(line_no) + ": empty key");
    }
    kv.entries_.emplace_back(std::string(key), std::string(Trim(line.substr(eq + 1))));
  }
  return kv;
}

KeyValueFile KeyValueFile::Load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str(), path);
}

bool KeyValueFile::Has(std::string_view key) const {
  for (const auto &[k, v] : entries_) {
    if (k == key) return true;
  }
  return false;
}

std::optional<std::string> KeyValueFile::Get(std::string_view key) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->first == key) return it->second;
  }
  return std::nullopt;
}

std::vector<std::string> KeyValueFile::GetAll(std::string_view key) const {
  std::vector<std::string> out;
  for (const auto &[k, v] : entries_) {
    if (k == key) out.push_back(v);
  }
  return out;
}

double KeyValueFile::GetDouble(std::string_view key, double fallback) const {
  auto v = Get(key);
  return v ? ParseDouble(*v, key) : fallback;
}

long long KeyValueFile::GetInt(std::string_view key, long long fallback) const {
  auto v = Get(key);
  return v ? ParseInt(*v, key) : fallback;
}

void KeyValueFile::RequireKnownKeys(
    const std::set<std::string, std::less<>> &allowed) const {
  for (const auto &[k, v] : entries_) {
    if (!allowed.contains(k)) {
      throw DataError((origin_.empty() ? std::string() : origin_ + ": ") +
                      "unknown config key '" + k + "'");
    }
  }
}

void KeyValueFile::Set(std::string key, std::string value) {
  for (auto &[k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

std::string KeyValueFile::Serialize() const {
  std::string out;
  for (const auto &[k, v] : entries_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

double ParseDouble(std::string_view text, std::string_view what) {
  text = Trim(text);
  double value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw DataError("invalid number for " + std::string(what) + ": '" +
                    std::string(text) + "'");
  }
  return value;
}

long long ParseInt(std::string_view text, std::string_view what) {
  text = Trim(text);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw DataError("invalid integer for " + std::string(what) + ": '" +
                    std::string(text) + "'");
  }
  return value;
}

}  // namespace swe
