#pragma once

// Explicit-state graph algorithms shared by every automaton in the library:
// Büchi automata, intersection automata, product systems and team products.
//
// A graph is anything modelling `LabeledGraph`: dense state ids
// [0, num_states()) and a callback enumeration of labelled successors.
// Ties between equal-length paths are broken step by step on
// (symbol in canonical order, then state id), so every search here is
// deterministic.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "rhp/symbols.hpp"

namespace rhp {

using StateId = std::uint32_t;
inline constexpr std::size_t kInfinity = std::numeric_limits<std::size_t>::max();
inline constexpr StateId kNoState = std::numeric_limits<StateId>::max();

template <class G>
concept LabeledGraph = requires(const G& g, StateId s) {
  { g.num_states() } -> std::convertible_to<std::size_t>;
  g.for_each_transition(s, [](Symbol, StateId) {});
};

struct Step {
  Symbol symbol;
  StateId state;
  bool operator==(const Step&) const = default;
};

/// start --steps[0]--> ... ; length() counts transitions.
struct Path {
  StateId start = kNoState;
  std::vector<Step> steps;

  std::size_t length() const { return steps.size(); }
  StateId end() const { return steps.empty() ? start : steps.back().state; }
  std::vector<StateId> states() const {
    std::vector<StateId> out{start};
    for (const auto& s : steps) out.push_back(s.state);
    return out;
  }
  bool operator==(const Path&) const = default;
};

struct Lasso {
  Path prefix;  // initial state to the accepting state
  Path cycle;   // accepting state back to itself, at least one step
};

inline bool step_less(const Step& a, const Step& b) {
  if (a.symbol != b.symbol) return symbol_less(a.symbol, b.symbol);
  return a.state < b.state;
}

using EdgeFilter = std::function<bool(StateId, Symbol, StateId)>;

template <LabeledGraph G>
std::vector<Step> sorted_successors(const G& g, StateId s, const EdgeFilter& filter = {}) {
  std::vector<Step> out;
  g.for_each_transition(s, [&](Symbol sym, StateId d) {
    if (!filter || filter(s, sym, d)) out.push_back({sym, d});
  });
  std::sort(out.begin(), out.end(), step_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Breadth-first tree whose discovery order is (distance, lexicographic path).
struct BfsTree {
  std::vector<StateId> order;  // discovery order
  std::vector<std::size_t> dist;
  std::vector<StateId> parent;
  std::vector<Symbol> via;

  bool reached(StateId s) const { return dist[s] != kInfinity; }

  Path path_to(StateId source, StateId target) const {
    Path p;
    p.start = source;
    for (StateId s = target; s != source; s = parent[s]) p.steps.push_back({via[s], s});
    std::reverse(p.steps.begin(), p.steps.end());
    return p;
  }
};

template <LabeledGraph G>
BfsTree bfs(const G& g, StateId source, const EdgeFilter& filter = {}) {
  const std::size_t n = g.num_states();
  BfsTree t{{}, std::vector<std::size_t>(n, kInfinity), std::vector<StateId>(n, kNoState),
            std::vector<Symbol>(n, 0)};
  t.dist[source] = 0;
  t.order.push_back(source);
  for (std::size_t head = 0; head < t.order.size(); ++head) {
    StateId s = t.order[head];
    for (const auto& st : sorted_successors(g, s, filter)) {
      if (t.dist[st.state] != kInfinity) continue;
      t.dist[st.state] = t.dist[s] + 1;
      t.parent[st.state] = s;
      t.via[st.state] = st.symbol;
      t.order.push_back(st.state);
    }
  }
  return t;
}

/// States reachable from q in exactly k steps.
template <LabeledGraph G>
std::set<StateId> reachable_in_k(const G& g, StateId q, std::size_t k) {
  if (q >= g.num_states()) throw UnknownStateError("unknown state " + std::to_string(q));
  std::set<StateId> cur{q};
  for (std::size_t i = 0; i < k && !cur.empty(); ++i) {
    std::set<StateId> next;
    for (StateId s : cur) g.for_each_transition(s, [&](Symbol, StateId d) { next.insert(d); });
    cur = std::move(next);
  }
  return cur;
}

/// Hop count of a shortest path, kInfinity when unreachable.
template <LabeledGraph G>
std::size_t distance(const G& g, StateId from, StateId to) {
  if (from >= g.num_states() || to >= g.num_states())
    throw UnknownStateError("unknown state in distance query");
  if (from == to) return 0;
  std::vector<std::size_t> dist(g.num_states(), kInfinity);
  std::deque<StateId> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    std::size_t found = kInfinity;
    g.for_each_transition(s, [&](Symbol, StateId d) {
      if (dist[d] != kInfinity) return;
      dist[d] = dist[s] + 1;
      if (d == to) found = dist[d];
      queue.push_back(d);
    });
    if (found != kInfinity) return found;
  }
  return kInfinity;
}

/// Minimum-hop, lexicographically least path from `from` to a state
/// satisfying `target`, using only edges accepted by `filter`.
template <LabeledGraph G, class Pred>
std::optional<Path> shortest_path(const G& g, StateId from, Pred target,
                                  const EdgeFilter& filter = {}) {
  if (target(from)) return Path{from, {}};
  auto t = bfs(g, from, filter);
  for (StateId s : t.order)
    if (target(s)) return t.path_to(from, s);
  return std::nullopt;
}

/// Multi-source reverse BFS: hop distance from each state to the set
/// `targets` over the edges of g.
template <LabeledGraph G>
std::vector<std::size_t> distance_to_set(const G& g, const std::vector<char>& targets) {
  const std::size_t n = g.num_states();
  std::vector<std::vector<StateId>> pred(n);
  for (StateId s = 0; s < n; ++s)
    g.for_each_transition(s, [&](Symbol, StateId d) { pred[d].push_back(s); });
  std::vector<std::size_t> dist(n, kInfinity);
  std::deque<StateId> queue;
  for (StateId s = 0; s < n; ++s)
    if (targets[s]) {
      dist[s] = 0;
      queue.push_back(s);
    }
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    for (StateId p : pred[s])
      if (dist[p] == kInfinity) {
        dist[p] = dist[s] + 1;
        queue.push_back(p);
      }
  }
  return dist;
}

/// Strongly connected components (iterative Tarjan). Returns a component
/// index per state; states unreachable from `roots` keep index kNoState when
/// `roots` is given.
template <LabeledGraph G>
std::vector<StateId> scc_index(const G& g, const std::vector<StateId>& roots) {
  const std::size_t n = g.num_states();
  std::vector<StateId> index(n, kNoState), low(n, 0), comp(n, kNoState);
  std::vector<char> on_stack(n, 0);
  std::vector<StateId> stack;
  StateId counter = 0, comp_count = 0;
  struct Frame {
    StateId s;
    std::vector<StateId> succ;
    std::size_t next;
  };
  for (StateId root : roots) {
    if (index[root] != kNoState) continue;
    std::vector<Frame> call;
    auto push = [&](StateId s) {
      index[s] = low[s] = counter++;
      stack.push_back(s);
      on_stack[s] = 1;
      Frame f{s, {}, 0};
      g.for_each_transition(s, [&](Symbol, StateId d) { f.succ.push_back(d); });
      call.push_back(std::move(f));
    };
    push(root);
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next < f.succ.size()) {
        StateId d = f.succ[f.next++];
        if (index[d] == kNoState) {
          push(d);
        } else if (on_stack[d]) {
          low[f.s] = std::min(low[f.s], index[d]);
        }
        continue;
      }
      StateId s = f.s;
      if (low[s] == index[s]) {
        StateId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = comp_count;
        } while (w != s);
        ++comp_count;
      }
      call.pop_back();
      if (!call.empty()) low[call.back().s] = std::min(low[call.back().s], low[s]);
    }
  }
  return comp;
}

/// Accepting lasso from `init`: a shortest path to an accepting state q_f and
/// a cycle q_f -> q_f of at least one step that uses at least one edge whose
/// symbol satisfies `cycle_edge` (pass an always-true predicate for plain
/// Büchi acceptance). Among candidates the accepting state discovered first
/// in BFS order is used.
template <LabeledGraph G, class Acc, class EdgePred>
std::optional<Lasso> find_lasso(const G& g, StateId init, Acc accepting, EdgePred cycle_edge) {
  auto comp = scc_index(g, {init});
  const std::size_t n = g.num_states();
  // Components containing a qualifying internal edge.
  std::vector<char> good_comp(n, 0);
  for (StateId s = 0; s < n; ++s) {
    if (comp[s] == kNoState) continue;
    g.for_each_transition(s, [&](Symbol sym, StateId d) {
      if (comp[d] == comp[s] && cycle_edge(sym)) good_comp[comp[s]] = 1;
    });
  }
  auto tree = bfs(g, init);
  for (StateId qf : tree.order) {
    if (!accepting(qf) || !good_comp[comp[qf]]) continue;
    Lasso lasso;
    lasso.prefix = tree.path_to(init, qf);
    // Cycle: from qf to the source of the lexicographically first reachable
    // qualifying edge within the component, across it, then back to qf.
    auto in_comp = [&](StateId a, Symbol, StateId b) {
      return comp[a] == comp[qf] && comp[b] == comp[qf];
    };
    auto from_qf = bfs(g, qf, in_comp);
    for (StateId u : from_qf.order) {
      std::optional<Step> edge;
      for (const auto& st : sorted_successors(g, u, in_comp))
        if (cycle_edge(st.symbol)) {
          edge = st;
          break;
        }
      if (!edge) continue;
      Path cyc = from_qf.path_to(qf, u);
      cyc.steps.push_back(*edge);
      if (edge->state != qf) {
        auto back = shortest_path(g, edge->state, [&](StateId s) { return s == qf; }, in_comp);
        cyc.steps.insert(cyc.steps.end(), back->steps.begin(), back->steps.end());
      }
      lasso.cycle = std::move(cyc);
      return lasso;
    }
  }
  return std::nullopt;
}

}  // namespace rhp
