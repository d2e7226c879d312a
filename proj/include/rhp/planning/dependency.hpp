#pragma once

// Participating services, alphabets up to a horizon, and the dependency
// partition of agents.

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "rhp/planning/problem.hpp"

namespace rhp {

/// Letters of `aut` (as a mask) constrained by some edge leaving q: the
/// edge's label is not closed under flipping that letter.
inline Symbol constrained_letters(const BuchiAutomaton& aut, StateId q) {
  aut.check(q);
  Symbol out = 0;
  const Symbol all = aut.letters().all();
  for (std::size_t e : aut.out_edges(q)) {
    const auto& label = aut.edges()[e].label;
    for (Symbol bit = 1; bit && bit <= all; bit <<= 1) {
      if (!(all & bit) || (out & bit)) continue;
      for (Symbol s : label)
        if (!label.contains(s ^ bit)) {
          out |= bit;
          break;
        }
    }
  }
  return out;
}

/// Mask of `aut`'s letters that are services of `ts`.
inline Symbol service_mask(const BuchiAutomaton& aut, const std::set<std::string>& services) {
  Symbol m = 0;
  for (std::size_t i = 0; i < aut.letters().size(); ++i)
    if (services.count(aut.letters().name(i))) m |= Symbol{1} << i;
  return m;
}

/// Whether AP_j participates in state q of agent i's automaton.
inline bool is_participating(const Problem& p, std::size_t i, StateId q, std::size_t j) {
  if (i >= p.size() || j >= p.size()) throw ValidationError("unknown agent");
  const auto& aut = p.agents[i].spec;
  aut.check(q);
  if (i == j) return true;
  return (constrained_letters(aut, q) & service_mask(aut, p.agents[j].ts.services())) != 0;
}

/// Pi_i^h(q): agents whose service sets participate in some state within
/// distance h of q. h = kInfinity means every reachable state.
inline std::set<std::size_t> alphabet_up_to_horizon(const Problem& p, std::size_t i, StateId q,
                                                    std::size_t h) {
  const auto& aut = p.agents[i].spec;
  aut.check(q);
  auto tree = bfs(aut, q);
  Symbol constrained = 0;
  for (StateId s : tree.order)
    if (tree.dist[s] <= h) constrained |= constrained_letters(aut, s);
  std::set<std::size_t> out{i};
  for (std::size_t j = 0; j < p.size(); ++j)
    if ((constrained & service_mask(aut, p.agents[j].ts.services())) != 0) out.insert(j);
  return out;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

/// Classes of agents; each class lists its members by priority, and classes
/// are ordered by their highest-priority member.
struct DependencyPartition {
  std::vector<std::vector<std::size_t>> classes;

  std::size_t class_of(std::size_t agent) const {
    for (std::size_t c = 0; c < classes.size(); ++c)
      if (std::find(classes[c].begin(), classes[c].end(), agent) != classes[c].end()) return c;
    return classes.size();
  }
  bool operator==(const DependencyPartition&) const = default;
};

/// Smallest partition such that j and k share a class whenever AP_j is in
/// Pi_k^h(q_k) or AP_k is in Pi_j^h(q_j). `ordering` lists agents by
/// priority, highest first.
inline DependencyPartition dependency_partition(const Problem& p, const std::vector<StateId>& q,
                                                std::size_t h,
                                                const std::vector<std::size_t>& ordering) {
  const std::size_t n = p.size();
  UnionFind uf(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j : alphabet_up_to_horizon(p, k, q[k], h)) uf.unite(j, k);
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < ordering.size(); ++r) rank[ordering[r]] = r;
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t a : ordering) groups[uf.find(a)].push_back(a);
  DependencyPartition out;
  for (auto& [root, members] : groups) out.classes.push_back(std::move(members));
  std::sort(out.classes.begin(), out.classes.end(),
            [&](const auto& a, const auto& b) { return rank[a.front()] < rank[b.front()]; });
  return out;
}

}  // namespace rhp
