#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace octal {

/// Number of atomic propositions in the shared alphabet (a..z).
inline constexpr int kAtomCount = 26;

inline bool is_atom_letter(char c) { return c >= 'a' && c <= 'z'; }

inline int atom_index(char c) {
  if (!is_atom_letter(c)) {
    throw std::invalid_argument(std::string("not an atom: '") + c + "'");
  }
  return c - 'a';
}

inline char atom_letter(int index) { return static_cast<char>('a' + index); }

/// Set of atomic propositions, stored as a 26-bit mask.
class AtomSet {
 public:
  constexpr AtomSet() = default;
  constexpr explicit AtomSet(std::uint32_t bits) : bits_(bits & kMask) {}

  /// The first `n` letters of the alphabet.
  static AtomSet first(int n) {
    if (n < 0 || n > kAtomCount) throw std::invalid_argument("atom count out of range");
    return AtomSet((1u << n) - 1u);
  }
  static AtomSet of(char c) { return AtomSet(1u << atom_index(c)); }

  bool contains(char c) const { return (bits_ >> atom_index(c)) & 1u; }
  bool contains_index(int i) const { return (bits_ >> i) & 1u; }
  void insert(char c) { bits_ |= 1u << atom_index(c); }
  bool empty() const { return bits_ == 0; }
  int size() const { return std::popcount(bits_); }
  std::uint32_t bits() const { return bits_; }
  bool subset_of(AtomSet other) const { return (bits_ & ~other.bits_) == 0; }

  /// Letters in alphabetical order, e.g. "abd".
  std::string letters() const {
    std::string out;
    for (int i = 0; i < kAtomCount; ++i) {
      if (contains_index(i)) out.push_back(atom_letter(i));
    }
    return out;
  }

  friend AtomSet operator|(AtomSet a, AtomSet b) { return AtomSet(a.bits_ | b.bits_); }
  friend AtomSet operator&(AtomSet a, AtomSet b) { return AtomSet(a.bits_ & b.bits_); }
  friend bool operator==(AtomSet, AtomSet) = default;

 private:
  static constexpr std::uint32_t kMask = (1u << kAtomCount) - 1u;
  std::uint32_t bits_ = 0;
};

/// A valuation of the alphabet: bit i set means atom i holds.
using Letter = std::uint32_t;

}  // namespace octal
