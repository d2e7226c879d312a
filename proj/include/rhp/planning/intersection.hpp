#pragma once

// Bounded intersection A^h of a dependency class's Büchi automata with a
// cyclic progress counter, its progressive values, pruning and horizon
// extension.
//
// Transitions are kept as move descriptors: for every member either "stay"
// (its silent marker is in the symbol) or "fire edge e" of its automaton.
// A descriptor is a transition iff some joint symbol realises it; the search
// for such a symbol is `find_symbol`.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rhp/automata/exchange_format.hpp"
#include "rhp/planning/problem.hpp"

namespace rhp {

/// Letters and per-member views of a class. Class letters are the services
/// some member's formula mentions that a member owns, plus the members'
/// silent markers. Services of agents outside the class are left
/// unconstrained when a member's automaton reads them.
struct ClassContext {
  const Problem* problem = nullptr;
  std::vector<std::size_t> members;  // priority order
  LetterTable letters;
  std::vector<Symbol> marker;    // per member
  std::vector<Symbol> services;  // per member, within class letters
  std::vector<LetterProjection> to_spec;
  // per member, per automaton edge: realisable class-letter values of the
  // letters the member reads, in canonical order
  std::vector<std::vector<std::vector<Symbol>>> edge_values;
  // per member: class letters the member's automaton reads
  std::vector<Symbol> reads;
  // per member: maximal service sets offered together in one system state
  std::vector<std::vector<Symbol>> offers;

  std::size_t size() const { return members.size(); }
  const BuchiAutomaton& spec(std::size_t m) const { return problem->agents[members[m]].spec; }
  const TransitionSystem& ts(std::size_t m) const { return problem->agents[members[m]].ts; }
  Symbol all_markers() const {
    Symbol s = 0;
    for (Symbol m : marker) s |= m;
    return s;
  }
};

inline ClassContext make_class_context(const Problem& p, std::vector<std::size_t> members) {
  ClassContext ctx;
  ctx.problem = &p;
  ctx.members = std::move(members);
  std::set<std::string> owned, mentioned;
  for (std::size_t a : ctx.members) {
    owned.insert(p.agents[a].ts.services().begin(), p.agents[a].ts.services().end());
    for (const auto& l : p.agents[a].spec.letters().names()) mentioned.insert(l);
  }
  std::vector<std::string> names;
  for (const auto& s : mentioned)
    if (owned.count(s)) names.push_back(s);
  for (std::size_t a : ctx.members) names.push_back(Problem::marker(a));
  ctx.letters = sorted_table(names);
  for (std::size_t m = 0; m < ctx.members.size(); ++m) {
    const auto& agent = p.agents[ctx.members[m]];
    ctx.marker.push_back(Symbol{1} << ctx.letters.at(Problem::marker(ctx.members[m])));
    Symbol svc = 0;
    for (const auto& s : agent.ts.services())
      if (auto i = ctx.letters.find(s)) svc |= Symbol{1} << *i;
    ctx.services.push_back(svc);
    std::vector<Symbol> offers;
    for (StateId q = 0; q < agent.ts.num_states(); ++q) {
      Symbol o = 0;
      for (const auto& l : agent.ts.labels(q))
        if (auto i = ctx.letters.find(l)) o |= Symbol{1} << *i;
      offers.push_back(o & svc);
    }
    std::sort(offers.begin(), offers.end());
    offers.erase(std::unique(offers.begin(), offers.end()), offers.end());
    std::erase_if(offers, [&](Symbol o) {
      return std::any_of(offers.begin(), offers.end(), [&](Symbol b) { return b != o && (o & ~b) == 0; });
    });
    ctx.offers.push_back(std::move(offers));
    LetterProjection proj(ctx.letters, agent.spec.letters());
    ctx.reads.push_back(proj.domain());
    // spec letters that are not class letters are free
    Symbol covered = proj(ctx.letters.all());
    std::vector<std::vector<Symbol>> per_edge;
    for (const auto& e : agent.spec.edges()) {
      std::vector<Symbol> vals;
      for (Symbol s : e.label) vals.push_back(proj.lift(s & covered));
      std::sort(vals.begin(), vals.end(), symbol_less);
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
      per_edge.push_back(std::move(vals));
    }
    ctx.edge_values.push_back(std::move(per_edge));
    ctx.to_spec.push_back(std::move(proj));
  }
  return ctx;
}

/// Whether member m can provide `sub` (class letters) in some system state.
inline bool offered(const ClassContext& ctx, std::size_t m, Symbol sub) {
  sub &= ctx.services[m];
  return std::any_of(ctx.offers[m].begin(), ctx.offers[m].end(), [&](Symbol o) { return (sub & ~o) == 0; });
}

/// Per member: -1 to stay silent, otherwise an edge index of its automaton.
using MoveChoice = std::vector<std::int32_t>;

/// A joint symbol realising `choice` where every firing member m provides a
/// subset of allowed[m], or nullopt. Letters no firing member reads are left
/// out, so the witness is the smallest realisation in that sense.
inline std::optional<Symbol> find_symbol(const ClassContext& ctx, const MoveChoice& choice,
                                         const std::vector<Symbol>& allowed) {
  Symbol permitted = 0, silent = 0;
  for (std::size_t m = 0; m < ctx.size(); ++m) {
    if (choice[m] < 0) silent |= ctx.marker[m];
    else permitted |= allowed[m] & ctx.services[m];
  }
  std::vector<std::size_t> firing;
  for (std::size_t m = 0; m < ctx.size(); ++m)
    if (choice[m] >= 0) firing.push_back(m);
  std::optional<Symbol> result;
  // depth-first over firing members, fixing the letters each one reads
  auto dfs = [&](auto&& self, std::size_t i, Symbol cur, Symbol fixed) -> bool {
    if (i == firing.size()) {
      for (std::size_t m : firing)
        if (!offered(ctx, m, cur)) return false;
      result = cur | silent;
      return true;
    }
    std::size_t m = firing[i];
    const Symbol reads = ctx.reads[m];
    for (Symbol v : ctx.edge_values[m][static_cast<std::size_t>(choice[m])]) {
      if (v & ~permitted) continue;
      if ((v & fixed) != (cur & fixed & reads)) continue;
      if (self(self, i + 1, cur | v, fixed | reads)) return true;
    }
    return false;
  };
  dfs(dfs, 0, 0, 0);
  return result;
}

/// Whether member m's automaton, on joint symbol sigma, can take `choice`.
inline bool realises(const ClassContext& ctx, std::size_t m, std::int32_t choice, Symbol sigma) {
  if (choice < 0) return (sigma & ctx.marker[m]) != 0;
  if (sigma & ctx.marker[m]) return false;
  const auto& vals = ctx.edge_values[m][static_cast<std::size_t>(choice)];
  Symbol mine = sigma & ctx.reads[m];
  return std::find(vals.begin(), vals.end(), mine) != vals.end();
}

class IntersectionAutomaton {
 public:
  struct Move {
    StateId dst;
    MoveChoice choice;
    Symbol witness;
  };

  IntersectionAutomaton(const ClassContext& ctx, std::vector<StateId> start, std::size_t h)
      : ctx_(&ctx) {
    if (start.size() != ctx.size()) throw ValidationError("one start state per member expected");
    intern(std::move(start), 1, 0);
    h_ = 0;
    while (h_ < h) grow();
    recompute_values();
  }

  const ClassContext& context() const { return *ctx_; }
  std::size_t num_states() const { return comps_.size(); }
  std::size_t horizon() const { return h_; }
  StateId initial() const { return 0; }
  const std::vector<StateId>& comps(StateId s) const { return comps_.at(s); }
  std::size_t counter(StateId s) const { return k_.at(s); }
  std::size_t depth(StateId s) const { return depth_.at(s); }
  /// Outgoing moves; empty for states at depth h.
  const std::vector<Move>& moves(StateId s) const { return moves_.at(s); }
  bool expanded(StateId s) const { return depth_[s] < h_; }

  template <class Fn>
  void for_each_transition(StateId s, Fn&& fn) const {
    for (const auto& mv : moves_[s]) fn(mv.witness, mv.dst);
  }

  /// Member whose acceptance advances the counter at counter value k.
  std::size_t designated(std::size_t k) const { return (k - 1) % ctx_->size(); }

  bool is_accepting(StateId s) const {
    if (s == initial()) return false;
    std::size_t d = designated(k_[s]);
    return ctx_->spec(d).is_accepting(comps_[s][d]);
  }
  bool has_accepting() const { return accepting_count_ > 0; }
  std::size_t num_accepting() const { return accepting_count_; }

  /// No state lies at depth h: extending adds nothing.
  bool saturated() const {
    for (StateId s = 0; s < num_states(); ++s)
      if (depth_[s] == h_) return false;
    return true;
  }

  void extend() {
    grow();
    recompute_values();
  }

  ProgressValue value(StateId s) const {
    ProgressValue v;
    v.k = k_.at(s);
    if (dist_[s] != kInfinity) v.negdist = -static_cast<long>(dist_[s]);
    return v;
  }
  bool alive(StateId s) const { return dist_.at(s) != kInfinity; }
  std::size_t num_alive() const {
    return static_cast<std::size_t>(std::count_if(dist_.begin(), dist_.end(),
                                                  [](std::size_t d) { return d != kInfinity; }));
  }
  std::size_t num_transitions() const {
    std::size_t n = 0;
    for (const auto& m : moves_) n += m.size();
    return n;
  }

 private:
  const ClassContext* ctx_;
  std::size_t h_ = 0;
  std::vector<std::vector<StateId>> comps_;
  std::vector<std::size_t> k_, depth_, dist_;
  std::vector<std::vector<Move>> moves_;
  std::map<std::vector<StateId>, StateId> index_;  // comps followed by k
  std::size_t accepting_count_ = 0;

  StateId intern(std::vector<StateId> comps, std::size_t k, std::size_t depth) {
    auto key = comps;
    key.push_back(static_cast<StateId>(k));
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    StateId id = static_cast<StateId>(comps_.size());
    index_.emplace(std::move(key), id);
    comps_.push_back(std::move(comps));
    k_.push_back(k);
    depth_.push_back(depth);
    moves_.emplace_back();
    return id;
  }

  // Expand every state at depth h_, then h_ += 1.
  void grow() {
    std::vector<StateId> frontier;
    for (StateId s = 0; s < num_states(); ++s)
      if (depth_[s] == h_) frontier.push_back(s);
    for (StateId s : frontier) expand(s);
    ++h_;
  }

  void expand(StateId s) {
    const auto& ctx = *ctx_;
    const std::size_t n = ctx.size();
    std::vector<std::vector<std::int32_t>> options(n);
    for (std::size_t m = 0; m < n; ++m) {
      options[m].push_back(-1);
      for (std::size_t e : ctx.spec(m).out_edges(comps_[s][m]))
        options[m].push_back(static_cast<std::int32_t>(e));
    }
    const std::size_t d = designated(k_[s]);
    const bool at_accepting = ctx.spec(d).is_accepting(comps_[s][d]);
    MoveChoice choice(n);
    std::vector<Move> out;
    auto rec = [&](auto&& self, std::size_t m) -> void {
      if (m == n) {
        auto sigma = find_symbol(ctx, choice, ctx.services);
        if (!sigma) return;
        std::vector<StateId> next(n);
        for (std::size_t i = 0; i < n; ++i)
          next[i] = choice[i] < 0 ? comps_[s][i]
                                  : ctx.spec(i).edges()[static_cast<std::size_t>(choice[i])].dst;
        // a visit counts once, when the designated run leaves it
        const std::size_t k2 = k_[s] + (at_accepting && choice[d] >= 0 ? 1 : 0);
        StateId dst = intern(std::move(next), k2, depth_[s] + 1);
        out.push_back({dst, choice, *sigma});
        return;
      }
      for (auto o : options[m]) {
        choice[m] = o;
        self(self, m + 1);
      }
    };
    rec(rec, 0);
    moves_[s] = std::move(out);
  }

  void recompute_values() {
    std::vector<char> acc(num_states(), 0);
    accepting_count_ = 0;
    for (StateId s = 0; s < num_states(); ++s)
      if (is_accepting(s)) {
        acc[s] = 1;
        ++accepting_count_;
      }
    dist_ = distance_to_set(*this, acc);
  }
};

/// Outcome of extending A until F_A is nonempty.
enum class AcceptStatus { Accepting, Saturated };

/// Extends `a` one layer at a time until F_A is nonempty or the automaton
/// stops changing. Throws BudgetExceeded when h_max is reached first.
inline AcceptStatus ensure_accepting(IntersectionAutomaton& a, std::size_t h_max) {
  while (!a.has_accepting()) {
    if (a.saturated()) return AcceptStatus::Saturated;
    if (a.horizon() >= h_max)
      throw BudgetExceeded("intersection horizon cap " + std::to_string(h_max) +
                           " reached without accepting states");
    a.extend();
  }
  return AcceptStatus::Accepting;
}

/// Every joint symbol of the class alphabet realising `choice` (exponential;
/// meant for serialisation and tests on small classes).
inline std::vector<Symbol> symbols_of(const ClassContext& ctx, const MoveChoice& choice) {
  std::vector<Symbol> out;
  const std::size_t n = ctx.size();
  auto rec = [&](auto&& self, std::size_t m, Symbol sigma) -> void {
    if (m == n) {
      for (std::size_t i = 0; i < n; ++i)
        if (!realises(ctx, i, choice[i], sigma)) return;
      out.push_back(sigma);
      return;
    }
    if (choice[m] < 0) {
      self(self, m + 1, sigma | ctx.marker[m]);
      return;
    }
    const Symbol svc = ctx.services[m];
    for (Symbol sub = 0;; sub = (sub - svc) & svc) {
      if (offered(ctx, m, sub)) self(self, m + 1, sigma | sub);
      if (sub == svc) break;
    }
  };
  rec(rec, 0, 0);
  std::sort(out.begin(), out.end(), symbol_less);
  return out;
}

/// The class alphabet Sigma_A: per member either its marker or a set of
/// its services offered together in one system state.
inline std::vector<Symbol> class_alphabet(const ClassContext& ctx) {
  std::vector<Symbol> out{0};
  for (std::size_t m = 0; m < ctx.size(); ++m) {
    std::vector<Symbol> next;
    for (Symbol s : out) {
      next.push_back(s | ctx.marker[m]);
      const Symbol svc = ctx.services[m];
      for (Symbol sub = 0;; sub = (sub - svc) & svc) {
        if (offered(ctx, m, sub)) next.push_back(s | sub);
        if (sub == svc) break;
      }
    }
    out = std::move(next);
  }
  std::sort(out.begin(), out.end(), symbol_less);
  return out;
}

/// State name "q1.q2:k" using the members' automaton state names.
inline std::string state_label(const IntersectionAutomaton& a, StateId s) {
  std::string out;
  for (std::size_t m = 0; m < a.context().size(); ++m)
    out += (m ? "." : "") + a.context().spec(m).state_name(a.comps(s)[m]);
  return out + ":" + std::to_string(a.counter(s));
}

/// Explicit automaton over the class alphabet, with F_A as accepting set and
/// progressive values; `alive_only` drops pruned states.
inline AnnotatedAutomaton to_explicit(const IntersectionAutomaton& a, bool alive_only = true) {
  const auto& ctx = a.context();
  AnnotatedAutomaton out{BuchiAutomaton(ctx.letters), {}};
  auto sigma = class_alphabet(ctx);
  out.automaton.set_alphabet(SymbolSet(sigma));
  std::vector<StateId> remap(a.num_states(), kNoState);
  for (StateId s = 0; s < a.num_states(); ++s) {
    if (alive_only && !a.alive(s)) continue;
    remap[s] = out.automaton.add_state(state_label(a, s));
    out.automaton.set_accepting(remap[s], a.is_accepting(s));
    out.values[remap[s]] = a.value(s);
  }
  out.automaton.set_initial(remap[a.initial()] == kNoState ? 0 : remap[a.initial()]);
  for (StateId s = 0; s < a.num_states(); ++s) {
    if (remap[s] == kNoState) continue;
    for (const auto& mv : a.moves(s))
      if (remap[mv.dst] != kNoState)
        for (Symbol x : symbols_of(ctx, mv.choice)) out.automaton.add_transition(remap[s], x, remap[mv.dst]);
  }
  return out;
}

}  // namespace rhp
