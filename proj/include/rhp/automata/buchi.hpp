#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "rhp/automata/graph.hpp"
#include "rhp/error.hpp"
#include "rhp/symbols.hpp"

namespace rhp {

/// Explicit set of symbols, kept sorted numerically for membership tests.
class SymbolSet {
 public:
  SymbolSet() = default;
  SymbolSet(std::initializer_list<Symbol> syms) : syms_(syms) { normalize(); }
  explicit SymbolSet(std::vector<Symbol> syms) : syms_(std::move(syms)) { normalize(); }

  bool contains(Symbol s) const { return std::binary_search(syms_.begin(), syms_.end(), s); }
  void insert(Symbol s) {
    auto it = std::lower_bound(syms_.begin(), syms_.end(), s);
    if (it == syms_.end() || *it != s) syms_.insert(it, s);
  }
  void merge(const SymbolSet& o) {
    std::vector<Symbol> out;
    std::set_union(syms_.begin(), syms_.end(), o.syms_.begin(), o.syms_.end(),
                   std::back_inserter(out));
    syms_ = std::move(out);
  }
  std::size_t size() const { return syms_.size(); }
  bool empty() const { return syms_.empty(); }
  auto begin() const { return syms_.begin(); }
  auto end() const { return syms_.end(); }
  const std::vector<Symbol>& values() const { return syms_; }

  /// Members in canonical (name-tuple) order.
  std::vector<Symbol> canonical() const {
    auto v = syms_;
    std::sort(v.begin(), v.end(), symbol_less);
    return v;
  }

  bool operator==(const SymbolSet&) const = default;

 private:
  std::vector<Symbol> syms_;
  void normalize() {
    std::sort(syms_.begin(), syms_.end());
    syms_.erase(std::unique(syms_.begin(), syms_.end()), syms_.end());
  }
};

/// Nondeterministic Büchi automaton with explicitly enumerated symbols.
/// Symbols are masks over `letters()`. Parallel transitions between the same
/// pair of states are merged into one edge carrying a SymbolSet.
class BuchiAutomaton {
 public:
  struct Edge {
    StateId src;
    StateId dst;
    SymbolSet label;
  };

  BuchiAutomaton() = default;
  explicit BuchiAutomaton(LetterTable letters) : letters_(std::move(letters)) {}

  const LetterTable& letters() const { return letters_; }

  StateId add_state(std::string name = {}) {
    if (name.empty()) name = std::to_string(names_.size());
    if (by_name_.count(name)) throw ValidationError("duplicate state name '" + name + "'");
    StateId id = static_cast<StateId>(names_.size());
    by_name_.emplace(name, id);
    names_.push_back(std::move(name));
    accepting_.push_back(0);
    out_.emplace_back();
    return id;
  }

  void set_initial(StateId s) {
    check(s);
    init_ = s;
  }
  void set_accepting(StateId s, bool acc = true) {
    check(s);
    accepting_[s] = acc;
  }

  /// Declares Σ explicitly. When never called, Σ is every subset of letters().
  void set_alphabet(SymbolSet sigma) { alphabet_ = std::move(sigma); }

  void add_transition(StateId src, Symbol sym, StateId dst) {
    check(src);
    check(dst);
    if (sym & ~letters_.all()) throw ValidationError("symbol uses undeclared letters");
    if (alphabet_ && !alphabet_->contains(sym))
      throw ValidationError("symbol " + letters_.format(sym) + " is not in the alphabet");
    auto key = std::pair{src, dst};
    auto it = edge_index_.find(key);
    if (it == edge_index_.end()) {
      it = edge_index_.emplace(key, edges_.size()).first;
      edges_.push_back({src, dst, {}});
      out_[src].push_back(it->second);
    }
    edges_[it->second].label.insert(sym);
  }

  void add_edge(StateId src, const SymbolSet& label, StateId dst) {
    for (Symbol s : label) add_transition(src, s, dst);
  }

  std::size_t num_states() const { return names_.size(); }
  std::size_t num_transitions() const {
    std::size_t n = 0;
    for (const auto& e : edges_) n += e.label.size();
    return n;
  }
  StateId initial() const {
    if (init_ == kNoState) throw ValidationError("automaton has no initial state");
    return init_;
  }
  bool has_initial() const { return init_ != kNoState; }
  bool is_accepting(StateId s) const { return accepting_.at(s) != 0; }
  const std::string& state_name(StateId s) const { return names_.at(s); }
  std::optional<StateId> find_state(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::size_t>& out_edges(StateId s) const { return out_.at(s); }

  SymbolSet alphabet() const {
    if (alphabet_) return *alphabet_;
    std::vector<Symbol> all;
    const Symbol full = letters_.all();
    for (Symbol s = 0;; s = (s - full) & full) {  // subset enumeration
      all.push_back(s);
      if (s == full) break;
    }
    return SymbolSet(std::move(all));
  }
  bool has_explicit_alphabet() const { return alphabet_.has_value(); }

  bool has_transition(StateId src, Symbol sym, StateId dst) const {
    check(src);
    check(dst);
    auto it = edge_index_.find({src, dst});
    return it != edge_index_.end() && edges_[it->second].label.contains(sym);
  }

  /// Label of the edge src -> dst, or nullptr.
  const SymbolSet* label(StateId src, StateId dst) const {
    auto it = edge_index_.find({src, dst});
    return it == edge_index_.end() ? nullptr : &edges_[it->second].label;
  }

  std::vector<StateId> successors(StateId src, Symbol sym) const {
    std::vector<StateId> out;
    for (std::size_t e : out_.at(src))
      if (edges_[e].label.contains(sym)) out.push_back(edges_[e].dst);
    std::sort(out.begin(), out.end());
    return out;
  }

  template <class Fn>
  void for_each_transition(StateId s, Fn&& fn) const {
    for (std::size_t e : out_[s])
      for (Symbol sym : edges_[e].label) fn(sym, edges_[e].dst);
  }

  /// Whether the automaton has silent markers and `sym` carries all of them.
  bool is_silent_symbol(Symbol sym) const {
    Symbol m = letters_.silent_mask();
    return m != 0 && (sym & m) == m;
  }

  void check(StateId s) const {
    if (s >= names_.size()) throw UnknownStateError("unknown state " + std::to_string(s));
  }

 private:
  LetterTable letters_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, StateId> by_name_;
  StateId init_ = kNoState;
  std::vector<char> accepting_;
  std::optional<SymbolSet> alphabet_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> out_;
  std::map<std::pair<StateId, StateId>, std::size_t> edge_index_;
};

/// Accepting lasso; with `require_non_silent`, the cycle must read at least
/// one symbol that is not purely silent.
inline std::optional<Lasso> find_accepting_lasso(const BuchiAutomaton& aut,
                                                 bool require_non_silent = false) {
  return find_lasso(
      aut, aut.initial(), [&](StateId s) { return aut.is_accepting(s); },
      [&](Symbol sym) { return !require_non_silent || !aut.is_silent_symbol(sym); });
}

namespace detail {

// Product of an automaton with the positions of a lasso word.
struct LassoWordProduct {
  const BuchiAutomaton& aut;
  const std::vector<Symbol>& word;  // prefix followed by loop
  std::size_t loop_start;

  std::size_t num_states() const { return aut.num_states() * word.size(); }
  template <class Fn>
  void for_each_transition(StateId s, Fn&& fn) const {
    StateId q = s / word.size();
    std::size_t pos = s % word.size();
    std::size_t next = pos + 1 < word.size() ? pos + 1 : loop_start;
    Symbol sym = word[pos];
    for (std::size_t e : aut.out_edges(q))
      if (aut.edges()[e].label.contains(sym))
        fn(sym, static_cast<StateId>(aut.edges()[e].dst * word.size() + next));
  }
};

}  // namespace detail

/// Whether the automaton accepts prefix·loop^ω. The loop must be nonempty.
inline bool accepts_lasso(const BuchiAutomaton& aut, const std::vector<Symbol>& prefix,
                          const std::vector<Symbol>& loop) {
  if (loop.empty()) throw ValidationError("accepts_lasso: loop must be nonempty");
  std::vector<Symbol> word = prefix;
  word.insert(word.end(), loop.begin(), loop.end());
  detail::LassoWordProduct g{aut, word, prefix.size()};
  auto init = static_cast<StateId>(aut.initial() * word.size());
  return find_lasso(
             g, init, [&](StateId s) { return aut.is_accepting(s / word.size()); },
             [](Symbol) { return true; })
      .has_value();
}

/// Restriction to states that are reachable from the initial state and can
/// reach an accepting cycle. The initial state is always kept.
inline BuchiAutomaton trim(const BuchiAutomaton& aut) {
  const StateId init = aut.initial();
  auto comp = scc_index(aut, {init});
  const std::size_t n = aut.num_states();
  std::vector<char> live(n, 0);
  for (StateId s = 0; s < n; ++s) {
    if (comp[s] == kNoState || !aut.is_accepting(s)) continue;
    bool cyc = false;
    aut.for_each_transition(s, [&](Symbol, StateId d) { cyc |= comp[d] == comp[s]; });
    if (cyc) live[s] = 1;
  }
  // Everything that reaches a live accepting state inside a cycle is live.
  std::vector<char> good(n, 0);
  for (StateId s = 0; s < n; ++s)
    if (live[s]) good[comp[s]] = 1;
  std::vector<char> seeds(n, 0);
  for (StateId s = 0; s < n; ++s)
    if (comp[s] != kNoState && good[comp[s]]) seeds[s] = 1;
  auto dist = distance_to_set(aut, seeds);
  BuchiAutomaton out(aut.letters());
  if (aut.has_explicit_alphabet()) out.set_alphabet(aut.alphabet());
  std::vector<StateId> remap(n, kNoState);
  for (StateId s = 0; s < n; ++s) {
    bool keep = s == init || (comp[s] != kNoState && dist[s] != kInfinity);
    if (keep) {
      remap[s] = out.add_state(aut.state_name(s));
      out.set_accepting(remap[s], aut.is_accepting(s));
    }
  }
  out.set_initial(remap[init]);
  for (const auto& e : aut.edges())
    if (remap[e.src] != kNoState && remap[e.dst] != kNoState &&
        (e.dst != init || dist[e.dst] != kInfinity))
      out.add_edge(remap[e.src], e.label, remap[e.dst]);
  return out;
}

}  // namespace rhp
