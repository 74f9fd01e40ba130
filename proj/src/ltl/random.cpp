#include <array>
#include <random>

#include "octal/ltl.hpp"

namespace octal::ltl {

namespace {

constexpr std::array<Kind, 4> kUnary = {Kind::Not, Kind::Globally, Kind::Finally, Kind::Next};
constexpr std::array<Kind, 10> kOperators = {
    Kind::Not,   Kind::Globally, Kind::Finally, Kind::Next,      Kind::And,
    Kind::Or,    Kind::Until,    Kind::Release, Kind::WeakUntil, Kind::StrongRelease,
};
constexpr double kConstantProbability = 0.02;

class Generator {
 public:
  explicit Generator(const GenConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

  Formula grow(std::size_t budget) {
    if (budget <= 1) return leaf();
    Kind op;
    if (budget == 2) {
      op = kUnary[pick(kUnary.size())];
    } else {
      op = kOperators[pick(kOperators.size())];
    }
    if (arity(op) == 1) return Formula::unary(op, grow(budget - 1));
    // Remaining budget split uniformly; each side gets at least one node.
    const std::size_t rest = budget - 1;
    const std::size_t left = 1 + pick(rest - 1);
    Formula lhs = grow(left);
    Formula rhs = grow(rest - left);
    return Formula::binary(op, lhs, rhs);
  }

 private:
  std::size_t pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }

  Formula leaf() {
    if (cfg_.allow_constants && std::uniform_real_distribution<double>(0, 1)(rng_) <
                                    kConstantProbability) {
      return Formula::constant(pick(2) == 0);
    }
    return Formula::atom(atom_letter(static_cast<int>(pick(cfg_.atom_count))));
  }

  GenConfig cfg_;
  std::mt19937_64 rng_;
};

}  // namespace

Formula random_formula(const GenConfig& cfg) {
  if (cfg.tree_size < 1) throw std::invalid_argument("tree_size must be >= 1");
  if (cfg.atom_count < 1 || cfg.atom_count > kAtomCount) {
    throw std::invalid_argument("atom_count must be in [1, 26]");
  }
  return Generator(cfg).grow(cfg.tree_size);
}

}  // namespace octal::ltl
