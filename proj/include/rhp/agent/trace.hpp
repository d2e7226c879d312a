#pragma once

// Traces s1 w1 s2 w2 ..., produced words and team words.

#include <set>
#include <string>
#include <vector>

#include "rhp/agent/transition_system.hpp"
#include "rhp/ltl/lasso_eval.hpp"

namespace rhp {

/// One step event: the silent marker, or a (possibly empty) set of services.
struct Event {
  bool silent = false;
  std::set<std::string> services;

  static Event eps() { return Event{true, {}}; }
  static Event serve(std::set<std::string> s) { return Event{false, std::move(s)}; }
  bool operator==(const Event&) const = default;
};

inline std::string format_event(const Event& e, std::size_t agent) {
  if (e.silent) return silent_marker(agent);
  std::string out = "{";
  bool first = true;
  for (const auto& s : e.services) {
    out += (first ? "" : ",") + s;
    first = false;
  }
  return out + "}";
}

/// A finite trace prefix: states.size() == events.size() + 1.
struct Trace {
  std::vector<StateId> states;
  std::vector<Event> events;

  std::size_t length() const { return events.size(); }
  void append(Event e, StateId next) {
    events.push_back(std::move(e));
    states.push_back(next);
  }
  void truncate(std::size_t len) {
    events.resize(len);
    states.resize(len + 1);
  }
};

struct ProducedWord {
  ltl::Word word;
  std::vector<std::size_t> times;  // 1-based indices of non-silent events
};

inline ProducedWord produced_word(const std::vector<Event>& events) {
  ProducedWord out;
  for (std::size_t i = 0; i < events.size(); ++i)
    if (!events[i].silent) {
      out.word.push_back(events[i].services);
      out.times.push_back(i + 1);
    }
  return out;
}

/// Checks the alternation constraint (serving keeps the state) first.
inline ProducedWord produced_word(const Trace& t) {
  if (t.states.size() != t.events.size() + 1)
    throw ValidationError("malformed trace: " + std::to_string(t.states.size()) + " states for " +
                          std::to_string(t.events.size()) + " events");
  for (std::size_t i = 0; i < t.events.size(); ++i)
    if (!t.events[i].silent && t.states[i] != t.states[i + 1])
      throw ValidationError("malformed trace: state changes at non-silent event " +
                            std::to_string(i + 1));
  return produced_word(t.events);
}

/// Word observed by `observer` over synchronised event sequences: at each of
/// the observer's non-silent times, the union of everyone's non-silent
/// services restricted to `observed`.
inline ltl::Word team_word(const std::vector<std::vector<Event>>& events, std::size_t observer,
                           const std::set<std::string>& observed) {
  if (observer >= events.size()) throw ValidationError("observer out of range");
  const std::size_t len = events[observer].size();
  for (const auto& e : events)
    if (e.size() != len) throw ValidationError("team_word: traces have different lengths");
  ltl::Word out;
  for (std::size_t t = 0; t < len; ++t) {
    if (events[observer][t].silent) continue;
    ltl::Letterset w;
    for (const auto& e : events)
      if (!e[t].silent)
        for (const auto& s : e[t].services)
          if (observed.count(s)) w.insert(s);
    out.push_back(std::move(w));
  }
  return out;
}

/// Replay check of a trace against its transition system: starts at the
/// initial state, serving stays put and offers only labelled services,
/// moving follows R.
inline std::vector<std::string> check_trace(const TransitionSystem& ts, const Trace& t) {
  std::vector<std::string> out;
  if (t.states.size() != t.events.size() + 1) {
    out.push_back("states/events length mismatch");
    return out;
  }
  if (t.states.empty() || t.states[0] != ts.initial()) out.push_back("does not start at s_init");
  for (std::size_t i = 0; i < t.events.size(); ++i) {
    StateId a = t.states[i], b = t.states[i + 1];
    const auto& e = t.events[i];
    std::string at = "step " + std::to_string(i + 1) + ": ";
    if (e.silent) {
      if (!ts.has_transition(a, b)) out.push_back(at + "move not in R");
    } else {
      if (a != b) out.push_back(at + "state changed while serving");
      for (const auto& s : e.services)
        if (!ts.labels(a).count(s)) out.push_back(at + "service '" + s + "' not offered");
    }
  }
  return out;
}

}  // namespace rhp
