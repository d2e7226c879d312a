#pragma once

// Rewinding the execution when no class can plan, with forbidden joint
// successors and cycle-compressed history.

#include <functional>
#include <map>

#include "rhp/planning/execution.hpp"

namespace rhp {

struct Snapshot {
  JointState before;
  std::size_t trace_len = 0;
  std::vector<std::size_t> ordering, counters;
  std::vector<Event> events;
  JointState after;
};

using History = std::vector<Snapshot>;
using ForbiddenMoves = std::map<JointState, std::set<JointState>>;

/// Drops every segment between two identical configurations: when a later
/// snapshot starts where an earlier one started, the earlier one and
/// everything up to the later one go.
inline History compress(const History& h) {
  History out;
  for (const auto& s : h) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Snapshot& o) { return o.before == s.before; });
    out.erase(it, out.end());
    out.push_back(s);
  }
  return out;
}

/// Replays a history: each snapshot must start where the previous ended and
/// its successor must be reachable under the recorded events.
inline bool replays(const Problem& p, const History& h) {
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (k > 0 && h[k].before != h[k - 1].after) return false;
    auto succ = automaton_successors(p, h[k].before, h[k].events, h[k].after.s);
    if (!std::binary_search(succ.begin(), succ.end(), h[k].after)) return false;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const bool moved = h[k].after.s[i] != h[k].before.s[i];
      if (h[k].events[i].silent ? !p.agents[i].ts.has_transition(h[k].before.s[i], h[k].after.s[i]) : moved)
        return false;
    }
  }
  return true;
}

struct BacktrackingExecution {
  Execution exec;
  History history;
  ForbiddenMoves forbidden;
  std::size_t backtracks = 0;
};

namespace detail {

inline void restore(BacktrackingExecution& b, const Snapshot& s) {
  for (std::size_t i = 0; i < b.exec.traces.size(); ++i) {
    b.exec.traces[i].truncate(s.trace_len);
    b.exec.runs[i].resize(s.trace_len + 1);
  }
  b.exec.ordering = s.ordering;
  b.exec.counters = s.counters;
}

inline std::vector<std::size_t> step(const Problem& p, BacktrackingExecution& b, const JointMove& mv) {
  Snapshot s{b.exec.state(), b.exec.length(), b.exec.ordering, b.exec.counters, mv.events, mv.next};
  auto hits = apply_move(p, b.exec, mv);
  b.history.push_back(std::move(s));
  b.history = compress(b.history);
  return hits;
}

}  // namespace detail

/// Undoes the last step after planning failed from the current state.
/// Forbids the failed successor, then either takes another automaton
/// successor of the same step or rewinds to before it. Throws Infeasible when
/// the history is empty.
inline std::string backtrack(const Problem& p, BacktrackingExecution& b) {
  const JointState x = b.exec.state();
  if (b.history.empty()) throw Infeasible("no plan from the initial configuration and nothing to undo");
  const Snapshot prev = b.history.back();
  b.history.pop_back();
  auto& forbid = b.forbidden[prev.before];
  forbid.insert(x);
  ++b.backtracks;
  detail::restore(b, prev);
  for (const auto& alt : automaton_successors(p, prev.before, prev.events, x.s)) {
    if (forbid.count(alt)) continue;
    detail::step(p, b, {prev.events, alt});
    return "alternative successor at step " + std::to_string(prev.trace_len + 1);
  }
  return "rewind to step " + std::to_string(prev.trace_len);
}

/// The receding-horizon loop with backtracking. Each iteration either
/// executes a step or backtracks once.
/// Runs up to cfg.iterations iterations; `stop`, when given, is consulted
/// after each one and ends the run early when it returns true.
inline BacktrackingExecution run_with_backtracking(
    const Problem& p, const EngineConfig& cfg, std::vector<std::size_t> ordering = {},
    const std::function<bool(const BacktrackingExecution&)>& stop = {}) {
  if (cfg.iterations == 0) throw ValidationError("iterations must be at least 1");
  BacktrackingExecution b{start_execution(p, std::move(ordering)), {}, {}, 0};
  static const std::set<JointState> none;
  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    const JointState x = b.exec.state();
    auto f = b.forbidden.find(x);
    auto mv = choose_move(p, x, b.exec.ordering, cfg.horizon, f == b.forbidden.end() ? none : f->second, rec);
    if (mv) {
      rec.hits = detail::step(p, b, *mv);
    } else {
      rec.backtrack_events.push_back(backtrack(p, b));
    }
    rec.ordering = b.exec.ordering;
    b.exec.log.push_back(std::move(rec));
    if (stop && stop(b)) break;
  }
  return b;
}

}  // namespace rhp
