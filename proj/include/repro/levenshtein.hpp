#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace repro {

/// Decodes UTF-8 into Unicode scalar values. Malformed sequences, overlong
/// encodings and surrogates decode to U+FFFD, one per offending byte.
inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  constexpr char32_t replacement = 0xFFFD;
  std::size_t i = 0;
  while (i < s.size()) {
    auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2, cp = b0 & 0x1F, min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3, cp = b0 & 0x0F, min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4, cp = b0 & 0x07, min = 0x10000;
    } else {
      out.push_back(replacement);
      ++i;
      continue;
    }
    bool ok = i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) ok = false;
      else cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(replacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

/// Length of a UTF-8 string in Unicode scalar values.
inline std::size_t scalar_length(std::string_view s) { return decode_utf8(s).size(); }

/// Unit-cost Levenshtein distance between two random-access sequences.
/// Two-row dynamic programme, O(|a|·|b|) time, O(min(|a|,|b|)) space.
template <class Seq>
std::size_t edit_distance(const Seq& a, const Seq& b) {
  const Seq& shorter = a.size() <= b.size() ? a : b;
  const Seq& longer = a.size() <= b.size() ? b : a;
  const std::size_t n = shorter.size();

  std::vector<std::size_t> prev(n + 1), cur(n + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= longer.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= n; ++j) {
      std::size_t substitute = prev[j - 1] + (longer[i - 1] == shorter[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitute});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

/// Levenshtein distance between two UTF-8 strings, counted in Unicode scalar
/// values rather than bytes.
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  return edit_distance(decode_utf8(a), decode_utf8(b));
}

class DegenerateInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Edit distance as a percentage of the corrected text's length.
inline double relative_edit_pct(std::string_view original, std::string_view corrected) {
  const auto len = scalar_length(corrected);
  if (len == 0) throw DegenerateInput("relative edit is undefined for an empty corrected statement");
  return 100.0 * static_cast<double>(levenshtein(original, corrected)) / static_cast<double>(len);
}

}  // namespace repro
