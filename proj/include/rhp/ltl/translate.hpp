#pragma once

// LTL to Büchi automaton translation.
//
// Tableau over sets of NNF obligations: a state is the set of formulas that
// must hold from the next position on. Expanding a state yields terms
// (literal cube, next obligations, fulfilled untils), i.e. a transition-based
// generalized Büchi automaton with one acceptance set per Until subformula.
// A level counter then degeneralizes it into a state-based automaton, which is
// trimmed and quotiented by bisimulation.

#include <algorithm>
#include <bit>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "rhp/automata/buchi.hpp"
#include "rhp/ltl/formula.hpp"

namespace rhp::ltl {

namespace detail {

class Tableau {
 public:
  explicit Tableau(const FormulaPtr& f) {
    letters_ = sorted_table({});
    for (const auto& a : atoms_of(*f)) letters_ = with_letter(letters_, a);
    if (letters_.size() > 16)
      throw ValidationError("formula has more than 16 atoms; explicit alphabets are capped");
    root_ = intern(to_nnf(f));
  }

  BuchiAutomaton build() {
    const std::size_t m = untils_.size();
    BuchiAutomaton aut(letters_);
    std::map<std::pair<std::vector<int>, std::size_t>, StateId> ids;
    std::vector<std::pair<std::vector<int>, std::size_t>> work;
    auto get = [&](const std::vector<int>& obl, std::size_t level) {
      auto key = std::pair{obl, level};
      auto it = ids.find(key);
      if (it != ids.end()) return it->second;
      StateId s = aut.add_state();
      aut.set_accepting(s, level == m);
      ids.emplace(key, s);
      work.push_back(key);
      return s;
    };
    aut.set_initial(get({root_}, 0));
    std::map<std::vector<int>, std::vector<Term>> expansions;
    for (std::size_t i = 0; i < work.size(); ++i) {
      auto [obl, level] = work[i];
      StateId src = ids.at(work[i]);
      auto eit = expansions.find(obl);
      if (eit == expansions.end()) eit = expansions.emplace(obl, expand(obl)).first;
      for (const auto& t : eit->second) {
        std::size_t j = level == m ? 0 : level;
        while (j < m && (t.fulfilled >> j & 1)) ++j;
        StateId dst = get(t.next, j);
        aut.add_edge(src, cube_symbols(t.pos, t.neg), dst);
      }
    }
    return aut;
  }

 private:
  struct Node {
    Op op;
    std::size_t letter = 0;
    int lhs = -1, rhs = -1;
    auto key() const { return std::tuple{op, letter, lhs, rhs}; }
  };
  struct Term {
    Symbol pos = 0, neg = 0;
    std::vector<int> next;
    std::uint64_t fulfilled = 0;  // bit u set iff until u is not postponed
    bool operator<(const Term& o) const {
      return std::tie(pos, neg, next, fulfilled) < std::tie(o.pos, o.neg, o.next, o.fulfilled);
    }
    bool operator==(const Term& o) const = default;
  };

  LetterTable letters_;
  std::vector<Node> nodes_;
  std::map<std::tuple<Op, std::size_t, int, int>, int> interned_;
  std::vector<int> untils_;  // node ids of Until nodes
  std::map<int, std::size_t> until_index_;
  int root_ = -1;

  static LetterTable with_letter(const LetterTable& t, const std::string& a) {
    auto names = t.names();
    names.push_back(a);
    return sorted_table(names);
  }

  int intern(const FormulaPtr& f) {
    Node n{f->op};
    if (f->op == Op::Atom) n.letter = letters_.at(f->atom);
    if (f->op == Op::Not) {
      // NNF: negation only on atoms
      n.letter = letters_.at(f->lhs->atom);
    } else {
      if (f->lhs) n.lhs = intern(f->lhs);
      if (f->rhs) n.rhs = intern(f->rhs);
    }
    auto it = interned_.find(n.key());
    if (it != interned_.end()) return it->second;
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(n);
    interned_.emplace(n.key(), id);
    if (n.op == Op::Until) {
      until_index_.emplace(id, untils_.size());
      untils_.push_back(id);
      if (untils_.size() > 64) throw ValidationError("too many Until subformulas");
    }
    return id;
  }

  struct Partial {
    std::vector<int> todo;
    std::set<int> seen;
    Symbol pos = 0, neg = 0;
    std::set<int> next;
    std::uint64_t postponed = 0;
  };

  std::vector<Term> expand(const std::vector<int>& obligations) {
    std::vector<Term> out;
    Partial start;
    start.todo = obligations;
    std::vector<Partial> stack{start};
    const std::uint64_t all = untils_.empty() ? 0 : (~std::uint64_t{0} >> (64 - untils_.size()));
    while (!stack.empty()) {
      Partial p = std::move(stack.back());
      stack.pop_back();
      bool dead = false;
      while (!p.todo.empty() && !dead) {
        int f = p.todo.back();
        p.todo.pop_back();
        if (!p.seen.insert(f).second) continue;
        const Node n = nodes_[f];
        switch (n.op) {
          case Op::True: break;
          case Op::False: dead = true; break;
          case Op::Atom:
            p.pos |= Symbol{1} << n.letter;
            dead = (p.pos & p.neg) != 0;
            break;
          case Op::Not:
            p.neg |= Symbol{1} << n.letter;
            dead = (p.pos & p.neg) != 0;
            break;
          case Op::And:
            p.todo.push_back(n.lhs);
            p.todo.push_back(n.rhs);
            break;
          case Op::Or: {
            Partial alt = p;
            alt.todo.push_back(n.rhs);
            stack.push_back(std::move(alt));
            p.todo.push_back(n.lhs);
            break;
          }
          case Op::Next: p.next.insert(n.lhs); break;
          case Op::Until: {
            // a U b  ==  b | (a & X(a U b)), postponing in the second branch
            Partial alt = p;
            alt.todo.push_back(n.lhs);
            alt.next.insert(f);
            alt.postponed |= std::uint64_t{1} << until_index_.at(f);
            stack.push_back(std::move(alt));
            p.todo.push_back(n.rhs);
            break;
          }
          case Op::Release: {
            // a R b  ==  b & (a | X(a R b))
            Partial alt = p;
            alt.todo.push_back(n.rhs);
            alt.next.insert(f);
            stack.push_back(std::move(alt));
            p.todo.push_back(n.lhs);
            p.todo.push_back(n.rhs);
            break;
          }
          default: dead = true; break;
        }
      }
      if (dead) continue;
      Term t{p.pos, p.neg, std::vector<int>(p.next.begin(), p.next.end()), all & ~p.postponed};
      out.push_back(std::move(t));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  SymbolSet cube_symbols(Symbol pos, Symbol neg) const {
    const Symbol free = letters_.all() & ~pos & ~neg;
    std::vector<Symbol> out;
    for (Symbol s = 0;; s = (s - free) & free) {
      out.push_back(s | pos);
      if (s == free) break;
    }
    return SymbolSet(std::move(out));
  }
};

}  // namespace detail

/// Quotient by the coarsest bisimulation that respects acceptance. The
/// language is preserved.
inline BuchiAutomaton reduce_bisimulation(const BuchiAutomaton& aut) {
  const std::size_t n = aut.num_states();
  std::vector<std::size_t> block(n);
  for (StateId s = 0; s < n; ++s) block[s] = aut.is_accepting(s) ? 1 : 0;
  std::size_t blocks = 0;
  for (;;) {
    using Sig = std::pair<std::size_t, std::vector<std::pair<std::size_t, std::vector<Symbol>>>>;
    std::map<Sig, std::size_t> sig_ids;
    std::vector<std::size_t> next(n);
    for (StateId s = 0; s < n; ++s) {
      std::map<std::size_t, SymbolSet> by_block;
      for (std::size_t e : aut.out_edges(s)) {
        const auto& edge = aut.edges()[e];
        by_block[block[edge.dst]].merge(edge.label);
      }
      Sig sig{block[s], {}};
      for (auto& [b, l] : by_block) sig.second.emplace_back(b, l.values());
      auto it = sig_ids.try_emplace(std::move(sig), sig_ids.size()).first;
      next[s] = it->second;
    }
    std::size_t count = sig_ids.size();
    block = std::move(next);
    if (count == blocks) break;
    blocks = count;
  }
  // Renumber blocks in order of first occurrence so state order is stable.
  std::vector<StateId> remap(n, kNoState);
  std::vector<StateId> block_state(n, kNoState);
  BuchiAutomaton out(aut.letters());
  if (aut.has_explicit_alphabet()) out.set_alphabet(aut.alphabet());
  for (StateId s = 0; s < n; ++s) {
    if (block_state[block[s]] == kNoState) {
      block_state[block[s]] = out.add_state();
      out.set_accepting(block_state[block[s]], aut.is_accepting(s));
    }
    remap[s] = block_state[block[s]];
  }
  out.set_initial(remap[aut.initial()]);
  for (const auto& e : aut.edges()) out.add_edge(remap[e.src], e.label, remap[e.dst]);
  return out;
}

/// Büchi automaton over 2^atoms(f) accepting exactly the models of f.
inline BuchiAutomaton translate_to_buchi(const FormulaPtr& f) {
  detail::Tableau tableau(f);
  return reduce_bisimulation(trim(tableau.build()));
}

}  // namespace rhp::ltl
