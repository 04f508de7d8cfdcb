#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace selcal {

// Lowercase, punctuation-free, single-spaced answer text with English
// articles removed. Only obtainable through normalize_answer.
class NormalizedAnswer {
 public:
  NormalizedAnswer() = default;

  const std::string& text() const { return text_; }
  bool empty() const { return text_.empty(); }
  bool contains(std::string_view needle) const {
    return text_.find(needle) != std::string::npos;
  }

  bool operator==(const NormalizedAnswer&) const = default;
  auto operator<=>(const NormalizedAnswer&) const = default;

 private:
  explicit NormalizedAnswer(std::string text) : text_(std::move(text)) {}
  friend NormalizedAnswer normalize_answer(std::string_view raw);

  std::string text_;
};

enum class TokenMode { Word, Char };

struct TokenSeq {
  std::vector<std::string> tokens;
  TokenMode mode = TokenMode::Word;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

// Lowercases (ASCII, Latin-1, Latin Extended-A, Greek, Cyrillic), maps ASCII
// and Unicode punctuation (hyphens included) and whitespace to spaces, drops
// the standalone words "a", "an", "the", then collapses and trims spaces.
// Bytes that are not valid UTF-8 pass through unchanged.
NormalizedAnswer normalize_answer(std::string_view raw);

// Word mode splits on single spaces; char mode yields one token per code
// point with spaces dropped.
TokenSeq tokenize(const NormalizedAnswer& answer, TokenMode mode);

TokenMode parse_token_mode(std::string_view name);
std::string_view to_string(TokenMode mode);

}  // namespace selcal
