#pragma once

// Agent transition systems T = (S, s_init, R, AP, L) and the grid-world
// shorthand used by scenario files.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "rhp/automata/graph.hpp"
#include "rhp/error.hpp"

namespace rhp {

class TransitionSystem {
 public:
  TransitionSystem() = default;
  explicit TransitionSystem(std::set<std::string> services) : services_(std::move(services)) {}

  StateId add_state(std::string name, std::set<std::string> labels = {}) {
    if (name.empty()) name = std::to_string(names_.size());
    if (by_name_.count(name)) throw ValidationError("duplicate state name '" + name + "'");
    StateId id = static_cast<StateId>(names_.size());
    by_name_.emplace(name, id);
    names_.push_back(std::move(name));
    labels_.push_back(std::move(labels));
    succ_.emplace_back();
    return id;
  }

  void add_transition(StateId a, StateId b) {
    check(a);
    check(b);
    auto& v = succ_[a];
    auto it = std::lower_bound(v.begin(), v.end(), b);
    if (it == v.end() || *it != b) v.insert(it, b);
  }

  void set_initial(StateId s) {
    check(s);
    init_ = s;
  }

  std::size_t num_states() const { return names_.size(); }
  StateId initial() const {
    if (init_ == kNoState) throw ValidationError("transition system has no initial state");
    return init_;
  }
  const std::string& state_name(StateId s) const { return names_.at(s); }
  std::optional<StateId> find_state(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }
  const std::set<std::string>& labels(StateId s) const { return labels_.at(s); }
  const std::vector<StateId>& successors(StateId s) const { return succ_.at(s); }
  bool has_transition(StateId a, StateId b) const {
    return a < succ_.size() && std::binary_search(succ_[a].begin(), succ_[a].end(), b);
  }
  const std::set<std::string>& services() const { return services_; }
  std::size_t num_transitions() const {
    std::size_t n = 0;
    for (const auto& v : succ_) n += v.size();
    return n;
  }

  template <class Fn>
  void for_each_transition(StateId s, Fn&& fn) const {
    for (StateId d : succ_[s]) fn(Symbol{0}, d);
  }

  void check(StateId s) const {
    if (s >= names_.size()) throw UnknownStateError("unknown state " + std::to_string(s));
  }

 private:
  std::set<std::string> services_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, StateId> by_name_;
  std::vector<std::set<std::string>> labels_;
  std::vector<std::vector<StateId>> succ_;
  StateId init_ = kNoState;
};

/// Model assumptions: self-loops everywhere, strong connectivity, labels
/// drawn from the agent's services. Returns one message per violation.
inline std::vector<std::string> validate_model(const TransitionSystem& ts) {
  std::vector<std::string> out;
  const std::size_t n = ts.num_states();
  if (n == 0) {
    out.push_back("no states");
    return out;
  }
  for (StateId s = 0; s < n; ++s) {
    if (!ts.has_transition(s, s)) out.push_back("state '" + ts.state_name(s) + "' has no self-loop");
    for (const auto& l : ts.labels(s))
      if (!ts.services().count(l))
        out.push_back("state '" + ts.state_name(s) + "' offers unknown service '" + l + "'");
  }
  auto comp = scc_index(ts, {0});
  for (StateId s = 0; s < n; ++s)
    if (comp[s] != comp[0]) {
      out.push_back("not strongly connected: '" + ts.state_name(s) + "' and '" +
                    ts.state_name(0) + "' are not mutually reachable");
      break;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Grid shorthand

struct GridCell {
  bool wall = false;
  std::string name;
  std::set<std::string> services;
};

struct Grid {
  std::vector<std::vector<GridCell>> cells;
  std::set<std::pair<std::pair<int, int>, std::pair<int, int>>> walls;  // blocked adjacencies

  std::size_t rows() const { return cells.size(); }
  std::size_t cols() const { return cells.empty() ? 0 : cells.front().size(); }

  static std::string default_name(int r, int c) {
    return "r" + std::to_string(r) + "c" + std::to_string(c);
  }

  void block(std::pair<int, int> a, std::pair<int, int> b) {
    walls.insert({std::min(a, b), std::max(a, b)});
  }
  bool blocked(std::pair<int, int> a, std::pair<int, int> b) const {
    return walls.count({std::min(a, b), std::max(a, b)}) > 0;
  }
};

/// Rows of whitespace-separated tokens: `.` free cell, `#` no cell,
/// `name:svc1+svc2` labelled cell (name may be empty).
inline Grid parse_grid(const std::vector<std::string>& rows) {
  Grid g;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::istringstream in(rows[r]);
    std::vector<GridCell> row;
    std::string tok;
    while (in >> tok) {
      GridCell cell;
      int c = static_cast<int>(row.size());
      if (tok == "#") {
        cell.wall = true;
      } else if (tok == ".") {
        cell.name = Grid::default_name(static_cast<int>(r), c);
      } else {
        auto colon = tok.find(':');
        std::string name = colon == std::string::npos ? tok : tok.substr(0, colon);
        cell.name = name.empty() ? Grid::default_name(static_cast<int>(r), c) : name;
        if (colon != std::string::npos && colon + 1 < tok.size()) {
          std::string rest = tok.substr(colon + 1);
          std::size_t start = 0;
          while (start <= rest.size()) {
            auto plus = rest.find('+', start);
            std::string svc = rest.substr(start, plus == std::string::npos ? std::string::npos
                                                                            : plus - start);
            if (svc.empty())
              throw ParseError("grid row " + std::to_string(r + 1) + ": empty service in '" +
                                   tok + "'",
                               r + 1);
            cell.services.insert(svc);
            if (plus == std::string::npos) break;
            start = plus + 1;
          }
        }
      }
      row.push_back(std::move(cell));
    }
    if (!g.cells.empty() && row.size() != g.cells.front().size())
      throw ParseError("grid row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                           " cells, expected " + std::to_string(g.cells.front().size()),
                       r + 1);
    g.cells.push_back(std::move(row));
  }
  return g;
}

/// Transition system over the non-wall cells: 4-neighbourhood moves not
/// crossing a wall edge, plus self-loops. Only services in `own` are kept as
/// labels, so several agents can share one annotated grid.
inline TransitionSystem grid_transition_system(const Grid& g, const std::set<std::string>& own) {
  TransitionSystem ts(own);
  std::map<std::pair<int, int>, StateId> id;
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) {
      const auto& cell = g.cells[r][c];
      if (cell.wall) continue;
      std::set<std::string> labels;
      for (const auto& s : cell.services)
        if (own.count(s)) labels.insert(s);
      id[{static_cast<int>(r), static_cast<int>(c)}] = ts.add_state(cell.name, std::move(labels));
    }
  for (const auto& [pos, s] : id) {
    ts.add_transition(s, s);
    const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      std::pair<int, int> nb{pos.first + dr[k], pos.second + dc[k]};
      auto it = id.find(nb);
      if (it != id.end() && !g.blocked(pos, nb)) ts.add_transition(s, it->second);
    }
  }
  return ts;
}

}  // namespace rhp
