#pragma once

#include <random>
#include <string>
#include <vector>

#include "rhp/automata/buchi.hpp"
#include "rhp/ltl/formula.hpp"
#include "rhp/ltl/lasso_eval.hpp"

namespace rhp::testing {

/// Every word over the symbols of `table` with length in [min_len, max_len].
inline std::vector<std::vector<Symbol>> all_words(const LetterTable& table, std::size_t min_len,
                                                  std::size_t max_len) {
  std::vector<Symbol> syms;
  for (Symbol s = 0; s <= table.all(); ++s) syms.push_back(s);
  std::vector<std::vector<Symbol>> out, layer{{}};
  for (std::size_t len = 0; len <= max_len; ++len) {
    if (len >= min_len) out.insert(out.end(), layer.begin(), layer.end());
    std::vector<std::vector<Symbol>> next;
    for (const auto& w : layer)
      for (Symbol s : syms) {
        next.push_back(w);
        next.back().push_back(s);
      }
    layer = std::move(next);
  }
  return out;
}

inline ltl::Word to_word(const LetterTable& table, const std::vector<Symbol>& syms) {
  ltl::Word w;
  for (Symbol s : syms) w.push_back(table.decode(s));
  return w;
}

/// Re-expresses `syms` (over `from`) as symbols over `to`, dropping letters
/// that `to` does not have.
inline std::vector<Symbol> project(const LetterTable& from, const LetterTable& to,
                                   const std::vector<Symbol>& syms) {
  LetterProjection p(from, to);
  std::vector<Symbol> out;
  for (Symbol s : syms) out.push_back(p(s));
  return out;
}

/// 50 formulas over {a, b}, each with at most three temporal operators.
inline const std::vector<std::string>& formula_corpus() {
  static const std::vector<std::string> corpus = {
      "a", "!a", "a & b", "a | b", "a & !a", "a | !a", "X a", "X !a", "X X a", "X (a & b)",
      "F a", "G a", "F !a", "G !a", "a U b", "!a U b", "a U !b", "G F a", "F G a", "G F !a",
      "F G !a", "G (a | b)", "F (a & b)", "G F a & F b", "F a & F b", "F a | G b",
      "a & X (a & b)", "b & X (b & a)", "G (!a | X b)", "a U (b U a)", "(a U b) U a",
      "G (a U b)", "F (a U b)", "X (a U b)", "G (a & X !a)", "F (a & X b)", "G F (a & X b)",
      "F (a & X X b)", "!(a U b)", "!(G F a)", "!F (a & b)", "G (b | X a)", "X G a",
      "X F b", "(G a) | (G b)", "F (G a | G b)", "a U X b", "G !(a & b)", "F a & G !b",
      "X a U X b",
  };
  return corpus;
}

/// Random formula over `atoms` with at most `max_temporal` temporal operators.
class FormulaGen {
 public:
  FormulaGen(std::vector<std::string> atoms, unsigned seed) : atoms_(std::move(atoms)), rng_(seed) {}

  ltl::FormulaPtr next(std::size_t max_temporal, std::size_t max_depth = 4) {
    std::size_t budget = max_temporal;
    return gen(budget, max_depth);
  }

  std::mt19937& rng() { return rng_; }

 private:
  std::vector<std::string> atoms_;
  std::mt19937 rng_;

  ltl::FormulaPtr leaf() {
    std::uniform_int_distribution<std::size_t> d(0, atoms_.size() + 1);
    std::size_t k = d(rng_);
    if (k < atoms_.size()) return ltl::atom(atoms_[k]);
    if (k == atoms_.size()) return !ltl::atom(atoms_[0]);
    return ltl::atom(atoms_.back());
  }

  ltl::FormulaPtr gen(std::size_t& budget, std::size_t depth) {
    if (depth == 0) return leaf();
    std::uniform_int_distribution<int> d(0, 9);
    int k = d(rng_);
    bool temporal = k >= 4 && k <= 8;
    if (temporal && budget == 0) k = k % 3;
    if (temporal && budget > 0) --budget;
    switch (k) {
      case 0: return leaf();
      case 1: return !gen(budget, depth - 1);
      case 2: return gen(budget, depth - 1) && gen(budget, depth - 1);
      case 3: return gen(budget, depth - 1) || gen(budget, depth - 1);
      case 4: return ltl::X(gen(budget, depth - 1));
      case 5: return ltl::F(gen(budget, depth - 1));
      case 6: return ltl::G(gen(budget, depth - 1));
      case 7:
      case 8: {
        auto l = gen(budget, depth - 1);
        return ltl::U(l, gen(budget, depth - 1));
      }
      default: return leaf();
    }
  }
};

}  // namespace rhp::testing
