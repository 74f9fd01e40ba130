#include <cctype>

#include "octal/ltl.hpp"

namespace octal::ltl {

ParseError::ParseError(const std::string& message, std::size_t offset)
    : std::runtime_error(message + " at offset " + std::to_string(offset)), offset_(offset) {}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Formula run() {
    skip_space();
    if (pos_ == text_.size()) throw ParseError("empty input", pos_);
    Formula f = implication();
    skip_space();
    if (pos_ != text_.size()) unexpected();
    return f;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  [[noreturn]] void unexpected() {
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (!is_token_start(c)) {
      throw ParseError(std::string("unknown token '") + c + "'", pos_);
    }
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  static bool is_token_start(char c) {
    if (is_atom_letter(c)) return true;
    switch (c) {
      case '!': case 'G': case 'F': case 'X': case 'U': case 'R': case 'W': case 'M':
      case '&': case '|': case '(': case ')': case '1': case '0': case 'N': case '-':
        return true;
      default:
        return false;
    }
  }

  Formula implication() {
    Formula lhs = disjunction();
    if (peek() == '-') {
      if (pos_ + 1 >= text_.size() || text_[pos_ + 1] != '>') unexpected();
      pos_ += 2;
      Formula rhs = implication();
      return !lhs | rhs;
    }
    return lhs;
  }

  Formula disjunction() {
    Formula lhs = conjunction();
    if (peek() == '|') {
      ++pos_;
      return lhs | disjunction();
    }
    return lhs;
  }

  Formula conjunction() {
    Formula lhs = temporal();
    if (peek() == '&') {
      ++pos_;
      return lhs & conjunction();
    }
    return lhs;
  }

  Formula temporal() {
    Formula lhs = unary();
    Kind kind;
    switch (peek()) {
      case 'U': kind = Kind::Until; break;
      case 'R': kind = Kind::Release; break;
      case 'W': kind = Kind::WeakUntil; break;
      case 'M': kind = Kind::StrongRelease; break;
      default: return lhs;
    }
    ++pos_;
    return Formula::binary(kind, lhs, temporal());
  }

  Formula unary() {
    const char c = peek();
    if (is_atom_letter(c)) {
      ++pos_;
      return Formula::atom(c);
    }
    switch (c) {
      case '!': ++pos_; return !unary();
      case 'G': ++pos_; return G(unary());
      case 'F': ++pos_; return F(unary());
      case 'X': ++pos_; return X(unary());
      case '1': ++pos_; return Formula::constant(true);
      case '0':
      case 'N': ++pos_; return Formula::constant(false);
      case '(': {
        ++pos_;
        Formula inner = implication();
        if (peek() != ')') unexpected();
        ++pos_;
        return inner;
      }
      default:
        unexpected();
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Formula parse(std::string_view text) { return Parser(text).run(); }

}  // namespace octal::ltl
