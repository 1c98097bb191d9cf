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

// Unicode-aware text helpers: whitespace tokenization, punctuation
// stripping and case folding.

#ifndef SWE_TEXT_H_
#define SWE_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace swe {

enum class TokenizeMode {
  // Split on whitespace, then trim leading and trailing punctuation from
  // every token. Tokens that become empty are dropped.
  kWhitespace,
  // Tokens are supplied by the caller separated by whitespace and kept
  // verbatim, except tokens made only of punctuation, which are dropped.
  kPretokenized,
};

// Returns views into `text`.
std::vector<std::string_view> Tokenize(std::string_view text,
                                       TokenizeMode mode = TokenizeMode::kWhitespace);

// True if every code point of `token` is in a Unicode punctuation category
// (Pc, Pd, Ps, Pe, Pi, Pf, Po). Empty strings are not punctuation.
bool IsPunctuation(std::string_view token);

// Unicode default case folding. Invalid UTF-8 is passed through unchanged.
std::string FoldCaseUtf8(std::string_view text);

// Splits `text` into UTF-8 code point substrings.
std::vector<std::string_view> SplitCodePoints(std::string_view text);

}  // namespace swe

#endif  // SWE_TEXT_H_
