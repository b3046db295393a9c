#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "deepwl/error.hpp"

namespace dwl {

// A relation or color name: a finite string over {0,1}.
class Symbol {
 public:
  Symbol() = default;
  explicit Symbol(std::string bits) : bits_(std::move(bits)) {
    for (char c : bits_)
      if (c != '0' && c != '1') throw PreconditionError("symbol must be a binary string: " + bits_);
  }

  const std::string& bits() const noexcept { return bits_; }
  std::size_t size() const noexcept { return bits_.size(); }

  // Textual form used in files and transcripts; "-" stands for the empty string.
  std::string text() const { return bits_.empty() ? std::string("-") : bits_; }
  static Symbol from_text(std::string_view t) {
    if (t == "-") return Symbol();
    return Symbol(std::string(t));
  }

  // Shortlex: shorter first, then lexicographic.
  friend std::strong_ordering operator<=>(const Symbol& a, const Symbol& b) {
    if (a.bits_.size() != b.bits_.size()) return a.bits_.size() <=> b.bits_.size();
    return a.bits_.compare(b.bits_) <=> 0;
  }
  friend bool operator==(const Symbol&, const Symbol&) = default;

 private:
  std::string bits_;
};

// Ordered set of symbols; iteration is shortlex.
using Vocabulary = std::set<Symbol>;

// The i-th binary string in shortlex order ("" is 0, "0" is 1, "1" is 2, ...).
inline Symbol shortlex_nth(std::uint64_t index) {
  // Strings of length L occupy indices [2^L - 1, 2^{L+1} - 1).
  std::size_t len = 0;
  while (index >= (std::uint64_t{1} << (len + 1)) - 1) ++len;
  std::uint64_t offset = index - ((std::uint64_t{1} << len) - 1);
  std::string bits(len, '0');
  for (std::size_t i = 0; i < len; ++i)
    if ((offset >> (len - 1 - i)) & 1U) bits[i] = '1';
  return Symbol(std::move(bits));
}

// The first `count` shortlex strings not in `used`.
template <class Container>
std::vector<Symbol> fresh_symbols(const Container& used, std::size_t count) {
  std::vector<Symbol> out;
  out.reserve(count);
  for (std::uint64_t i = 0; out.size() < count; ++i) {
    Symbol s = shortlex_nth(i);
    bool taken = false;
    for (const Symbol& u : used)
      if (u == s) {
        taken = true;
        break;
      }
    if (!taken) out.push_back(std::move(s));
  }
  return out;
}

inline Symbol fresh_symbol(const Vocabulary& used) {
  for (std::uint64_t i = 0;; ++i) {
    Symbol s = shortlex_nth(i);
    if (!used.contains(s)) return s;
  }
}

}  // namespace dwl
