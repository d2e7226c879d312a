#pragma once

// Bounded product P^H of a class's transition systems with A^h, plan search
// and horizon extension.

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <set>

#include "rhp/agent/trace.hpp"
#include "rhp/planning/intersection.hpp"

namespace rhp {

class ProductSystem {
 public:
  struct Edge {
    Symbol symbol;
    StateId dst;
  };

  ProductSystem(const IntersectionAutomaton& a, std::vector<StateId> start, std::size_t H)
      : a_(&a) {
    const auto& ctx = a.context();
    if (start.size() != ctx.size()) throw ValidationError("one start state per member expected");
    for (std::size_t m = 0; m < ctx.size(); ++m) {
      const auto& ts = ctx.ts(m);
      std::vector<Symbol> masks;
      for (StateId s = 0; s < ts.num_states(); ++s) {
        Symbol mask = 0;
        for (const auto& l : ts.labels(s))
          if (auto i = ctx.letters.find(l)) mask |= Symbol{1} << *i;
        masks.push_back(mask & ctx.services[m]);
      }
      label_mask_.push_back(std::move(masks));
    }
    intern(std::move(start), a.initial(), 0);
    while (H_ < H) grow();
  }

  const IntersectionAutomaton& intersection() const { return *a_; }
  const ClassContext& context() const { return a_->context(); }
  std::size_t num_states() const { return a_state_.size(); }
  std::size_t horizon() const { return H_; }
  StateId initial() const { return 0; }
  const std::vector<StateId>& ts_states(StateId n) const { return ts_.at(n); }
  StateId a_state(StateId n) const { return a_state_.at(n); }
  std::size_t depth(StateId n) const { return depth_.at(n); }
  ProgressValue value(StateId n) const { return a_->value(a_state_.at(n)); }
  /// Outgoing edges in canonical order; empty for states at depth H.
  const std::vector<Edge>& edges(StateId n) const { return edges_.at(n); }
  std::size_t num_transitions() const {
    std::size_t k = 0;
    for (const auto& e : edges_) k += e.size();
    return k;
  }

  template <class Fn>
  void for_each_transition(StateId n, Fn&& fn) const {
    for (const auto& e : edges_[n]) fn(e.symbol, e.dst);
  }

  /// Whether the prioritised member provides services (possibly none) on sigma.
  bool lead_serves(Symbol sigma) const { return (sigma & context().marker[0]) == 0; }

  bool saturated() const {
    for (StateId n = 0; n < num_states(); ++n)
      if (depth_[n] == H_) return false;
    return true;
  }

  void extend() { grow(); }

 private:
  const IntersectionAutomaton* a_;
  std::vector<std::vector<Symbol>> label_mask_;
  std::size_t H_ = 0;
  std::vector<std::vector<StateId>> ts_;
  std::vector<StateId> a_state_;
  std::vector<std::size_t> depth_;
  std::vector<std::vector<Edge>> edges_;
  std::map<std::vector<StateId>, StateId> index_;  // ts states followed by the A state

  StateId intern(std::vector<StateId> s, StateId q, std::size_t depth) {
    auto key = s;
    key.push_back(q);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    StateId id = static_cast<StateId>(a_state_.size());
    index_.emplace(std::move(key), id);
    ts_.push_back(std::move(s));
    a_state_.push_back(q);
    depth_.push_back(depth);
    edges_.emplace_back();
    return id;
  }

  void grow() {
    std::vector<StateId> frontier;
    for (StateId n = 0; n < num_states(); ++n)
      if (depth_[n] == H_) frontier.push_back(n);
    for (StateId n : frontier) expand(n);
    ++H_;
  }

  void expand(StateId n) {
    const auto& ctx = context();
    const std::size_t k = ctx.size();
    const std::vector<StateId> s = ts_[n];
    const StateId q = a_state_[n];
    const std::size_t d = depth_[n];
    std::vector<Edge> out;
    std::vector<Symbol> allowed(k);
    for (const auto& mv : a_->moves(q)) {
      if (!a_->alive(mv.dst)) continue;
      for (std::size_t m = 0; m < k; ++m) allowed[m] = mv.choice[m] < 0 ? 0 : label_mask_[m][s[m]];
      auto sigma = find_symbol(ctx, mv.choice, allowed);
      if (!sigma) continue;
      std::vector<StateId> next = s;
      auto rec = [&](auto&& self, std::size_t m) -> void {
        if (m == k) {
          out.push_back({*sigma, intern(next, mv.dst, d + 1)});
          return;
        }
        if (mv.choice[m] >= 0) {
          self(self, m + 1);
          return;
        }
        for (StateId t : ctx.ts(m).successors(s[m])) {
          next[m] = t;
          self(self, m + 1);
        }
        next[m] = s[m];
      };
      rec(rec, 0);
    }
    std::sort(out.begin(), out.end(), [](const Edge& x, const Edge& y) {
      return step_less({x.symbol, x.dst}, {y.symbol, y.dst});
    });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const Edge& x, const Edge& y) {
                            return x.symbol == y.symbol && x.dst == y.dst;
                          }),
              out.end());
    edges_[n] = std::move(out);
  }
};

/// A plan: product states q_1 ... q_{m+1} and the symbols between them.
struct Plan {
  std::vector<StateId> states;
  std::vector<Symbol> symbols;
  ProgressValue value;

  std::size_t length() const { return symbols.size(); }
};

/// Filter on first moves: returns true to exclude the edge.
using RootFilter = std::function<bool(const ProductSystem&, const ProductSystem::Edge&)>;

/// Shortest path from the initial state that contains a step where the
/// prioritised member serves, ending in a state of maximal value among those
/// so reachable; nullopt when that value does not exceed the initial one.
inline std::optional<Plan> find_plan(const ProductSystem& p, const RootFilter& exclude = {}) {
  const std::size_t n = p.num_states();
  std::vector<std::size_t> parent(2 * n, kInfinity);
  std::vector<Symbol> via(2 * n, 0);
  std::vector<char> seen(2 * n, 0);
  std::deque<std::size_t> queue;
  const std::size_t root = 2 * p.initial();
  seen[root] = 1;
  queue.push_back(root);
  std::optional<std::size_t> best;
  while (!queue.empty()) {
    std::size_t x = queue.front();
    queue.pop_front();
    StateId node = static_cast<StateId>(x / 2);
    bool flag = x % 2;
    if (flag && (!best || p.value(node) > p.value(static_cast<StateId>(*best / 2)))) best = x;
    for (const auto& e : p.edges(node)) {
      if (x == root && exclude && exclude(p, e)) continue;
      std::size_t y = 2 * e.dst + ((flag || p.lead_serves(e.symbol)) ? 1 : 0);
      if (seen[y]) continue;
      seen[y] = 1;
      parent[y] = x;
      via[y] = e.symbol;
      queue.push_back(y);
    }
  }
  if (!best || !(p.value(static_cast<StateId>(*best / 2)) > p.value(p.initial()))) return std::nullopt;
  Plan plan;
  plan.value = p.value(static_cast<StateId>(*best / 2));
  for (std::size_t x = *best; x != root; x = parent[x]) {
    plan.states.push_back(static_cast<StateId>(x / 2));
    plan.symbols.push_back(via[x]);
  }
  plan.states.push_back(p.initial());
  std::reverse(plan.states.begin(), plan.states.end());
  std::reverse(plan.symbols.begin(), plan.symbols.end());
  return plan;
}

/// Trace prefix of member m along a plan.
inline Trace project_trace(const ProductSystem& p, const Plan& plan, std::size_t m) {
  const auto& ctx = p.context();
  if (m >= ctx.size()) throw ValidationError("agent not in class");
  Trace t;
  t.states.push_back(p.ts_states(plan.states.front())[m]);
  for (std::size_t j = 0; j < plan.length(); ++j) {
    Symbol sigma = plan.symbols[j];
    Event e;
    if (sigma & ctx.marker[m]) {
      e = Event::eps();
    } else {
      auto names = ctx.letters.decode(sigma & ctx.services[m]);
      e = Event::serve({names.begin(), names.end()});
    }
    t.append(std::move(e), p.ts_states(plan.states[j + 1])[m]);
  }
  return t;
}

/// Run prefix of member m's automaton along a plan.
inline std::vector<StateId> project_run(const ProductSystem& p, const Plan& plan, std::size_t m) {
  if (m >= p.context().size()) throw ValidationError("agent not in class");
  std::vector<StateId> run;
  for (StateId n : plan.states) run.push_back(p.intersection().comps(p.a_state(n))[m]);
  return run;
}

struct HorizonConfig {
  std::size_t h = 3, H = 5, h_max = 6, H_max = 12;
};

/// Outcome of planning for one class. `plan` is set iff a plan was found;
/// otherwise the class cannot progress from its current state within the
/// automata (both A and P stopped changing) or, with a root filter, within
/// the caps.
struct ClassPlan {
  std::unique_ptr<IntersectionAutomaton> a;
  std::unique_ptr<ProductSystem> p;
  std::optional<Plan> plan;
};

/// Builds A at h and P at H and extends them until a plan exists. Throws
/// BudgetExceeded when a cap is reached first and no root filter is given.
inline ClassPlan plan_class(const ClassContext& ctx, const std::vector<StateId>& s0,
                            const std::vector<StateId>& q0, const HorizonConfig& cfg,
                            const RootFilter& exclude = {}) {
  ClassPlan out;
  out.a = std::make_unique<IntersectionAutomaton>(ctx, q0, cfg.h);
  auto budget = [&](const std::string& what) {
    if (exclude) return;
    throw BudgetExceeded(what);
  };
  try {
    if (ensure_accepting(*out.a, cfg.h_max) == AcceptStatus::Saturated) return out;
  } catch (const BudgetExceeded&) {
    if (!exclude) throw;
    return out;
  }
  std::optional<std::set<std::pair<std::vector<StateId>, std::vector<StateId>>>> reached;
  for (;;) {
    out.p = std::make_unique<ProductSystem>(*out.a, s0, cfg.H);
    for (;;) {
      out.plan = find_plan(*out.p, exclude);
      if (out.plan) return out;
      if (out.p->saturated()) break;
      if (out.p->horizon() >= cfg.H_max) {
        budget("product horizon cap " + std::to_string(cfg.H_max) + " reached without a plan");
        return out;
      }
      out.p->extend();
    }
    if (out.a->saturated()) return out;
    // a deeper A that lets the systems reach nothing new will not help
    std::set<std::pair<std::vector<StateId>, std::vector<StateId>>> now;
    for (StateId n = 0; n < out.p->num_states(); ++n)
      now.insert({out.p->ts_states(n), out.a->comps(out.p->a_state(n))});
    if (reached == now) return out;
    reached = std::move(now);
    if (out.a->horizon() >= cfg.h_max) {
      budget("intersection horizon cap " + std::to_string(cfg.h_max) + " reached without a plan");
      return out;
    }
    out.a->extend();
  }
}

}  // namespace rhp
