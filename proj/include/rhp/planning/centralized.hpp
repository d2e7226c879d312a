#pragma once

// Offline baseline: explicit team product per dependency class (unbounded
// horizon), cyclic-counter acceptance, accepting-lasso search.

#include <map>

#include "rhp/agent/trace.hpp"
#include "rhp/automata/graph.hpp"
#include "rhp/planning/dependency.hpp"

namespace rhp {

inline constexpr std::size_t kDefaultStateCap = 1'000'000;

class TeamProduct {
 public:
  struct Edge {
    Symbol symbol;
    StateId dst;
  };
  struct Node {
    std::vector<StateId> s, q;
    std::size_t c = 0;  // counter, members.size() is accepting
  };

  TeamProduct(const Problem& p, std::vector<std::size_t> members, const std::vector<StateId>& s0,
              const std::vector<StateId>& q0, std::size_t cap = kDefaultStateCap)
      : p_(&p), members_(std::move(members)) {
    std::set<std::string> names;
    for (std::size_t a : members_) {
      for (const auto& l : p.agents[a].spec.letters().names())
        if (p.agents[a].ts.services().count(l) || in_class(p.owner_of(l))) names.insert(l);
      names.insert(Problem::marker(a));
    }
    letters_ = LetterTable(std::vector<std::string>(names.begin(), names.end()));
    for (std::size_t a : members_) {
      Symbol own = 0;
      for (const auto& svc : p.agents[a].ts.services())
        if (auto i = letters_.find(svc)) own |= Symbol{1} << *i;
      services_.push_back(own);
      marker_.push_back(Symbol{1} << *letters_.find(Problem::marker(a)));
      std::vector<std::size_t> pos;  // automaton letter -> class letter
      for (const auto& l : p.agents[a].spec.letters().names()) {
        auto i = letters_.find(l);
        pos.push_back(i ? *i : kInfinity);
      }
      to_spec_.push_back(std::move(pos));
    }
    Node init;
    for (std::size_t a : members_) {
      init.s.push_back(s0[a]);
      init.q.push_back(q0[a]);
    }
    cap_ = cap;
    intern(std::move(init));
    for (StateId n = 0; n < nodes_.size(); ++n) expand(n);
  }

  const std::vector<std::size_t>& members() const { return members_; }
  const LetterTable& letters() const { return letters_; }
  std::size_t num_states() const { return nodes_.size(); }
  std::size_t num_transitions() const {
    std::size_t k = 0;
    for (const auto& e : edges_) k += e.size();
    return k;
  }
  const Node& node(StateId n) const { return nodes_.at(n); }
  bool is_accepting(StateId n) const { return nodes_.at(n).c == members_.size(); }
  const std::vector<Edge>& edges(StateId n) const { return edges_.at(n); }

  template <class Fn>
  void for_each_transition(StateId n, Fn&& fn) const {
    for (const auto& e : edges_[n]) fn(e.symbol, e.dst);
  }

  /// Event of member m on a product symbol.
  Event event(std::size_t m, Symbol sigma) const {
    if (sigma & marker_[m]) return Event::eps();
    auto names = letters_.decode(sigma & services_[m]);
    return Event::serve({names.begin(), names.end()});
  }

 private:
  const Problem* p_;
  std::vector<std::size_t> members_;
  std::size_t cap_ = kDefaultStateCap;
  LetterTable letters_;
  std::vector<Symbol> services_, marker_;
  std::vector<std::vector<std::size_t>> to_spec_;
  std::vector<Node> nodes_;
  std::vector<std::vector<Edge>> edges_;
  std::map<std::tuple<std::vector<StateId>, std::vector<StateId>, std::size_t>, StateId> index_;

  bool in_class(std::size_t agent) const {
    return std::find(members_.begin(), members_.end(), agent) != members_.end();
  }

  StateId intern(Node n) {
    auto key = std::make_tuple(n.s, n.q, n.c);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    if (nodes_.size() >= cap_)
      throw BudgetExceeded("team product exceeds " + std::to_string(cap_) + " states");
    StateId id = static_cast<StateId>(nodes_.size());
    index_.emplace(std::move(key), id);
    nodes_.push_back(std::move(n));
    edges_.emplace_back();
    return id;
  }

  Symbol spec_symbol(std::size_t m, Symbol sigma) const {
    Symbol out = 0;
    for (std::size_t i = 0; i < to_spec_[m].size(); ++i)
      if (to_spec_[m][i] != kInfinity && (sigma >> to_spec_[m][i] & 1)) out |= Symbol{1} << i;
    return out;
  }

  void expand(StateId n) {
    const Node cur = nodes_[n];
    const std::size_t k = members_.size();
    // Per member options: (symbol part, next system state).
    std::vector<std::vector<std::pair<Symbol, StateId>>> opts(k);
    for (std::size_t m = 0; m < k; ++m) {
      const auto& ts = p_->agents[members_[m]].ts;
      for (StateId t : ts.successors(cur.s[m])) opts[m].push_back({marker_[m], t});
      Symbol avail = 0;
      for (const auto& l : ts.labels(cur.s[m]))
        if (auto i = letters_.find(l)) avail |= Symbol{1} << *i;
      avail &= services_[m];
      for (Symbol sub = avail;; sub = (sub - 1) & avail) {
        opts[m].push_back({sub, cur.s[m]});
        if (sub == 0) break;
      }
    }
    std::vector<Edge> out;
    std::vector<std::size_t> pick(k, 0);
    for (;;) {
      Symbol sigma = 0;
      std::vector<StateId> next_s(k);
      for (std::size_t m = 0; m < k; ++m) {
        sigma |= opts[m][pick[m]].first;
        next_s[m] = opts[m][pick[m]].second;
      }
      std::vector<std::vector<StateId>> next_q(k);
      bool ok = true;
      for (std::size_t m = 0; m < k && ok; ++m) {
        if (sigma & marker_[m]) next_q[m] = {cur.q[m]};
        else next_q[m] = p_->agents[members_[m]].spec.successors(cur.q[m], spec_symbol(m, sigma));
        ok = !next_q[m].empty();
      }
      if (ok) {
        const std::size_t d = cur.c % k;
        const bool fires = !(sigma & marker_[d]);
        const bool advance = fires && p_->agents[members_[d]].spec.is_accepting(cur.q[d]);
        const std::size_t c2 = (cur.c == k ? 0 : cur.c) + (advance ? 1 : 0);
        Node nx{next_s, std::vector<StateId>(k), c2};
        auto rec = [&](auto&& self, std::size_t m) -> void {
          if (m == k) {
            out.push_back({sigma, intern(nx)});
            return;
          }
          for (StateId t : next_q[m]) {
            nx.q[m] = t;
            self(self, m + 1);
          }
        };
        rec(rec, 0);
      }
      std::size_t m = k;
      while (m > 0 && ++pick[m - 1] == opts[m - 1].size()) pick[--m] = 0;
      if (m == 0) break;
    }
    std::sort(out.begin(), out.end(), [](const Edge& x, const Edge& y) {
      return step_less({x.symbol, x.dst}, {y.symbol, y.dst});
    });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const Edge& x, const Edge& y) { return x.symbol == y.symbol && x.dst == y.dst; }),
              out.end());
    edges_[n] = std::move(out);
  }
};

/// Per-agent lasso of a solved class: events and states of the prefix and of
/// the repeated cycle.
struct AgentLasso {
  std::size_t agent = 0;
  Trace prefix;                // from the initial system state
  std::vector<Event> cycle;    // repeated forever from prefix.states.back()
  std::vector<StateId> cycle_states;  // states after each cycle event
  std::vector<StateId> run_prefix, run_cycle;
};

struct ClassSolution {
  std::vector<std::size_t> members;
  std::size_t product_states = 0, product_transitions = 0;
  std::vector<AgentLasso> agents;
};

inline std::optional<ClassSolution> solve_class(const Problem& p, std::vector<std::size_t> members,
                                                const std::vector<StateId>& s0,
                                                const std::vector<StateId>& q0,
                                                std::size_t cap = kDefaultStateCap) {
  TeamProduct team(p, std::move(members), s0, q0, cap);
  auto lasso = find_lasso(
      team, 0, [&](StateId n) { return team.is_accepting(n); }, [](Symbol) { return true; });
  if (!lasso) return std::nullopt;
  ClassSolution sol;
  sol.members = team.members();
  sol.product_states = team.num_states();
  sol.product_transitions = team.num_transitions();
  for (std::size_t m = 0; m < sol.members.size(); ++m) {
    AgentLasso al;
    al.agent = sol.members[m];
    al.prefix.states.push_back(team.node(0).s[m]);
    al.run_prefix.push_back(team.node(0).q[m]);
    for (const auto& st : lasso->prefix.steps) {
      al.prefix.append(team.event(m, st.symbol), team.node(st.state).s[m]);
      al.run_prefix.push_back(team.node(st.state).q[m]);
    }
    for (const auto& st : lasso->cycle.steps) {
      al.cycle.push_back(team.event(m, st.symbol));
      al.cycle_states.push_back(team.node(st.state).s[m]);
      al.run_cycle.push_back(team.node(st.state).q[m]);
    }
    sol.agents.push_back(std::move(al));
  }
  return sol;
}

/// Solves every class of the unbounded-horizon partition from the initial
/// configuration. nullopt when some class has no solution.
inline std::optional<std::vector<ClassSolution>> solve_centralized(const Problem& p,
                                                                   std::size_t cap = kDefaultStateCap) {
  std::vector<StateId> s0, q0;
  std::vector<std::size_t> ordering;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s0.push_back(p.agents[i].ts.initial());
    q0.push_back(p.agents[i].spec.initial());
    ordering.push_back(i);
  }
  std::vector<ClassSolution> out;
  for (const auto& cls : dependency_partition(p, q0, kInfinity, ordering).classes) {
    auto sol = solve_class(p, cls, s0, q0, cap);
    if (!sol) return std::nullopt;
    out.push_back(std::move(*sol));
  }
  return out;
}

struct SizeReport {
  std::vector<std::size_t> members;
  double analytic = 0;  // product of system sizes
  std::optional<std::size_t> materialized;
};

/// Analytic bound per class; materialized team product size when it fits
/// under `cap` (0 skips materialization).
inline std::vector<SizeReport> size_report(const Problem& p,
                                           const std::vector<std::vector<std::size_t>>& classes,
                                           std::size_t cap = 0) {
  std::vector<StateId> s0, q0;
  for (const auto& a : p.agents) {
    s0.push_back(a.ts.initial());
    q0.push_back(a.spec.initial());
  }
  std::vector<SizeReport> out;
  for (const auto& cls : classes) {
    SizeReport r;
    r.members = cls;
    r.analytic = 1;
    for (std::size_t a : cls) r.analytic *= static_cast<double>(p.agents[a].ts.num_states());
    if (cap > 0) {
      try {
        r.materialized = TeamProduct(p, cls, s0, q0, cap).num_states();
      } catch (const BudgetExceeded&) {
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace rhp
