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

#include "swe/text.h"

#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace swe {
namespace {

struct CodePoint {
  UChar32 value;
  int32_t begin;
  int32_t end;
};

// Decodes the code point starting at `offset`; invalid sequences decode
// to a negative value spanning one byte.
CodePoint Next(std::string_view s, int32_t offset) {
  const auto *bytes = reinterpret_cast<const uint8_t *>(s.data());
  const auto length = static_cast<int32_t>(s.size());
  int32_t i = offset;
  UChar32 c;
  U8_NEXT(bytes, i, length, c);
  return {c, offset, i};
}

bool IsSpace(UChar32 c) {
  if (c < 0x80) return c == ' ' || (c >= '\t' && c <= '\r');
  return c > 0 && u_isUWhiteSpace(c);
}

bool IsPunct(UChar32 c) {
  if (c < 0) return false;
  return u_ispunct(c);
}

std::string_view TrimPunctuation(std::string_view token) {
  int32_t begin = 0;
  const auto end_limit = static_cast<int32_t>(token.size());
  while (begin < end_limit) {
    const CodePoint cp = Next(token, begin);
    if (!IsPunct(cp.value)) break;
    begin = cp.end;
  }
  // Walk forward remembering the end of the last non-punctuation code point.
  int32_t last_keep = begin;
  int32_t i = begin;
  while (i < end_limit) {
    const CodePoint cp = Next(token, i);
    if (!IsPunct(cp.value)) last_keep = cp.end;
    i = cp.end;
  }
  return token.substr(static_cast<size_t>(begin), static_cast<size_t>(last_keep - begin));
}

bool IsAscii(std::string_view s) {
  for (unsigned char c : s) {
    if (c >= 0x80) return false;
  }
  return true;
}

bool IsValidUtf8(std::string_view s) {
  int32_t i = 0;
  while (i < static_cast<int32_t>(s.size())) {
    const CodePoint cp = Next(s, i);
    if (cp.value < 0) return false;
    i = cp.end;
  }
  return true;
}

}  // namespace

std::vector<std::string_view> Tokenize(std::string_view text, TokenizeMode mode) {
  std::vector<std::string_view> tokens;
  const auto n = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < n) {
    CodePoint cp = Next(text, i);
    if (IsSpace(cp.value)) {
      i = cp.end;
      continue;
    }
    const int32_t start = i;
    while (i < n) {
      cp = Next(text, i);
      if (IsSpace(cp.value)) break;
      i = cp.end;
    }
    std::string_view token = text.substr(static_cast<size_t>(start),
                                         static_cast<size_t>(i - start));
    if (mode == TokenizeMode::kWhitespace) {
      token = TrimPunctuation(token);
      if (!token.empty()) tokens.push_back(token);
    } else if (!IsPunctuation(token)) {
      tokens.push_back(token);
    }
  }
  return tokens;
}

bool IsPunctuation(std::string_view token) {
  if (token.empty()) return false;
  int32_t i = 0;
  while (i < static_cast<int32_t>(token.size())) {
    const CodePoint cp = Next(token, i);
    if (!IsPunct(cp.value)) return false;
    i = cp.end;
  }
  return true;
}

std::string FoldCaseUtf8(std::string_view text) {
  if (IsAscii(text)) {
    std::string out(text);
    for (char &c : out) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
  }
  if (!IsValidUtf8(text)) return std::string(text);
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  u.foldCase(U_FOLD_CASE_DEFAULT);
  std::string out;
  u.toUTF8String(out);
  return out;
}

std::vector<std::string_view> SplitCodePoints(std::string_view text) {
  std::vector<std::string_view> out;
  int32_t i = 0;
  while (i < static_cast<int32_t>(text.size())) {
    const CodePoint cp = Next(text, i);
    out.push_back(text.substr(static_cast<size_t>(cp.begin),
                              static_cast<size_t>(cp.end - cp.begin)));
    i = cp.end;
  }
  return out;
}

}  // namespace swe
