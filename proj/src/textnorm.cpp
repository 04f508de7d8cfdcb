#include "selcal/textnorm.hpp"

#include <array>
#include <cstdint>

#include "selcal/errors.hpp"

namespace selcal {
namespace {

struct Decoded {
  char32_t cp;
  std::size_t len;
  bool valid;
};

Decoded decode_utf8(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1, true};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {b0, 1, false};
  }
  if (i + len > s.size()) return {b0, 1, false};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return {b0, 1, false};
    cp = (cp << 6) | (b & 0x3F);
  }
  // Reject overlong encodings so that re-encoding is byte-identical.
  static constexpr std::array<char32_t, 5> kMin = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    return {b0, 1, false};
  }
  return {cp, len, true};
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_ascii_punct(char32_t c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
         (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
}

bool is_ascii_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Separators and punctuation outside ASCII that act as word breaks.
bool is_unicode_break(char32_t c) {
  switch (c) {
    case 0x00A0:  // no-break space
    case 0x00A1:  // inverted exclamation
    case 0x00A7:  // section
    case 0x00AB:  // left guillemet
    case 0x00B6:  // pilcrow
    case 0x00B7:  // middle dot
    case 0x00BB:  // right guillemet
    case 0x00BF:  // inverted question
    case 0x1680:  // ogham space
      return true;
    default:
      break;
  }
  return (c >= 0x2000 && c <= 0x206F) ||  // general punctuation, spaces, dashes
         (c >= 0x2E00 && c <= 0x2E7F) ||  // supplemental punctuation
         (c >= 0x3000 && c <= 0x303F) ||  // CJK symbols and punctuation
         (c >= 0xFE30 && c <= 0xFE4F) ||  // CJK compatibility forms
         (c >= 0xFE50 && c <= 0xFE6B) ||  // small form variants
         (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
         (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65);
}

char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 0x20;
  if (c < 0x80) return c;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  if (c >= 0x100 && c <= 0x137) return c | 1;
  if (c >= 0x139 && c <= 0x148) return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return c | 1;
  if (c == 0x178) return 0xFF;
  if (c >= 0x179 && c <= 0x17E) return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

bool is_article(std::string_view w) { return w == "a" || w == "an" || w == "the"; }

}  // namespace

NormalizedAnswer normalize_answer(std::string_view raw) {
  std::string mapped;
  mapped.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size();) {
    const Decoded d = decode_utf8(raw, i);
    if (!d.valid) {
      mapped.push_back(raw[i]);
    } else if (is_ascii_space(d.cp) || is_ascii_punct(d.cp) || is_unicode_break(d.cp)) {
      mapped.push_back(' ');
    } else {
      encode_utf8(to_lower(d.cp), mapped);
    }
    i += d.len;
  }

  std::string out;
  out.reserve(mapped.size());
  std::size_t pos = 0;
  while (pos < mapped.size()) {
    while (pos < mapped.size() && mapped[pos] == ' ') ++pos;
    const std::size_t start = pos;
    while (pos < mapped.size() && mapped[pos] != ' ') ++pos;
    if (start == pos) break;
    const std::string_view word(mapped.data() + start, pos - start);
    if (is_article(word)) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(word);
  }
  return NormalizedAnswer(std::move(out));
}

TokenSeq tokenize(const NormalizedAnswer& answer, TokenMode mode) {
  TokenSeq seq;
  seq.mode = mode;
  const std::string& s = answer.text();
  if (mode == TokenMode::Word) {
    std::size_t start = 0;
    while (start < s.size()) {
      std::size_t end = s.find(' ', start);
      if (end == std::string::npos) end = s.size();
      seq.tokens.emplace_back(s.substr(start, end - start));
      start = end + 1;
    }
    return seq;
  }
  for (std::size_t i = 0; i < s.size();) {
    const std::size_t len = decode_utf8(s, i).len;
    if (s[i] != ' ') seq.tokens.emplace_back(s.substr(i, len));
    i += len;
  }
  return seq;
}

TokenMode parse_token_mode(std::string_view name) {
  if (name == "word") return TokenMode::Word;
  if (name == "char") return TokenMode::Char;
  throw InvalidArgument("unknown similarity mode '" + std::string(name) +
                        "' (expected word|char)");
}

std::string_view to_string(TokenMode mode) {
  return mode == TokenMode::Word ? "word" : "char";
}

}  // namespace selcal
