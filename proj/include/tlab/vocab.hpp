// Copyright 2026 The tlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TLAB_VOCAB_HPP_
#define TLAB_VOCAB_HPP_

#include <sstream>
#include <string>
#include <vector>

#include "tlab/errors.hpp"

namespace tlab {

// Corpus convention: token id k (1..V) renders as the word "w<k>".
// Blank is id 0 and never appears in text.

inline std::string token_to_word(int token) { return "w" + std::to_string(token); }

inline int word_to_token(const std::string& word) {
  if (word.size() < 2 || word[0] != 'w')
    throw ParseError("not a token word: '" + word + "'");
  int value = 0;
  for (std::size_t i = 1; i < word.size(); ++i) {
    char c = word[i];
    if (c < '0' || c > '9') throw ParseError("not a token word: '" + word + "'");
    value = value * 10 + (c - '0');
  }
  if (value < 1) throw ParseError("token word out of range: '" + word + "'");
  return value;
}

inline std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

inline std::vector<std::string> tokens_to_words(const std::vector<int>& tokens) {
  std::vector<std::string> words;
  words.reserve(tokens.size());
  for (int t : tokens) words.push_back(token_to_word(t));
  return words;
}

inline std::vector<int> words_to_tokens(const std::vector<std::string>& words) {
  std::vector<int> tokens;
  tokens.reserve(words.size());
  for (const auto& w : words) tokens.push_back(word_to_token(w));
  return tokens;
}

inline std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += ' ';
    out += words[i];
  }
  return out;
}

inline std::vector<int> text_to_tokens(const std::string& text) {
  return words_to_tokens(split_words(text));
}

}  // namespace tlab

#endif  // TLAB_VOCAB_HPP_
