#pragma once

// Scenario files (JSON), metrics CSV and trace logs.

#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "rhp/planning/backtracking.hpp"
#include "rhp/planning/centralized.hpp"

namespace rhp {

struct Scenario {
  Problem problem;
  EngineConfig engine;
  std::vector<std::size_t> ordering;
  std::size_t window = 25;
  std::size_t state_cap = kDefaultStateCap;
};

namespace detail {

using nlohmann::json;

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + std::min(byte, text.size()), '\n'));
}

inline const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing '" + key + "'", 0);
  return j.at(key);
}

template <class T>
T get(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what(), 0);
  }
}

inline std::size_t positive(const json& root, const std::string& key, std::size_t dflt) {
  if (!root.contains(key)) return dflt;
  auto v = get<long long>(root.at(key), key);
  if (v < 1) throw ValidationError(key + " must be at least 1");
  return static_cast<std::size_t>(v);
}

inline Grid load_grid(const json& g, const std::string& where) {
  auto rows = get<std::vector<std::string>>(field(g, "rows", where), where + ".rows");
  Grid grid = parse_grid(rows);
  if (g.contains("walls"))
    for (const auto& w : g.at("walls")) {
      auto pair = get<std::vector<std::pair<int, int>>>(w, where + ".walls");
      if (pair.size() != 2) throw ParseError(where + ".walls: expected two cells", 0);
      grid.block(pair[0], pair[1]);
    }
  return grid;
}

inline TransitionSystem explicit_system(const json& a, const std::string& where) {
  std::set<std::string> services;
  if (a.contains("services")) services = get<std::set<std::string>>(a.at("services"), where + ".services");
  std::vector<std::pair<std::string, std::set<std::string>>> states;
  for (const auto& s : field(a, "states", where)) {
    if (s.is_string()) states.push_back({s.get<std::string>(), {}});
    else
      states.push_back({get<std::string>(field(s, "name", where + ".states"), where + ".states"),
                        s.contains("labels") ? get<std::set<std::string>>(s.at("labels"), where + ".labels")
                                             : std::set<std::string>{}});
    if (!a.contains("services")) services.insert(states.back().second.begin(), states.back().second.end());
  }
  TransitionSystem ts(services);
  for (auto& [name, labels] : states) ts.add_state(name, labels);
  for (const auto& t : field(a, "transitions", where)) {
    auto pair = get<std::vector<std::string>>(t, where + ".transitions");
    if (pair.size() != 2) throw ParseError(where + ".transitions: expected [from, to]", 0);
    auto from = ts.find_state(pair[0]), to = ts.find_state(pair[1]);
    if (!from || !to) throw UnknownStateError(where + ": unknown state in transition " + pair[0] + " -> " + pair[1]);
    ts.add_transition(*from, *to);
  }
  return ts;
}

}  // namespace detail

/// Parses and validates a scenario document.
inline Scenario parse_scenario(const std::string& text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario: ") + e.what(), detail::line_of(text, e.byte));
  }
  if (!root.is_object()) throw ParseError("scenario: top level must be an object", 1);
  Scenario sc;
  auto& hz = sc.engine.horizon;
  hz.h = detail::positive(root, "h", 3);
  hz.H = detail::positive(root, "H", 5);
  hz.h_max = detail::positive(root, "max_h", std::max<std::size_t>(6, hz.h));
  hz.H_max = detail::positive(root, "max_H", std::max<std::size_t>(12, hz.H));
  if (hz.h_max < hz.h || hz.H_max < hz.H) throw ValidationError("horizon caps must not be below the horizons");
  sc.engine.iterations = detail::positive(root, "iterations", 100);
  sc.window = detail::positive(root, "window", 25);
  sc.state_cap = detail::positive(root, "state_cap", kDefaultStateCap);

  std::map<std::string, Grid> grids;
  if (root.contains("grids"))
    for (const auto& [name, g] : root.at("grids").items()) grids.emplace(name, detail::load_grid(g, "grids." + name));

  const auto& agents = detail::field(root, "agents", "scenario");
  if (!agents.is_array() || agents.empty()) throw ValidationError("scenario: no agents");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    const std::string where = "agents[" + std::to_string(i) + "]";
    auto name = a.contains("name") ? detail::get<std::string>(a.at("name"), where + ".name") : std::to_string(i + 1);
    if (name.empty() || name.find_first_of(" \t\n|,;+>") != std::string::npos)
      throw ValidationError(where + ": agent name '" + name + "' must be non-empty without blanks or | , ; + >");
    if (!index.emplace(name, i).second) throw ValidationError("duplicate agent name '" + name + "'");
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    const std::string where = "agents[" + std::to_string(i) + "]";
    TransitionSystem ts;
    if (a.contains("grid")) {
      auto gname = detail::get<std::string>(a.at("grid"), where + ".grid");
      auto it = grids.find(gname);
      if (it == grids.end()) throw ValidationError(where + ": unknown grid '" + gname + "'");
      ts = grid_transition_system(
          it->second, detail::get<std::set<std::string>>(detail::field(a, "services", where), where + ".services"));
    } else {
      ts = detail::explicit_system(a, where);
    }
    if (a.contains("init")) {
      auto init = detail::get<std::string>(a.at("init"), where + ".init");
      auto s = ts.find_state(init);
      if (!s) throw UnknownStateError(where + ": unknown initial state '" + init + "'");
      ts.set_initial(*s);
    } else if (ts.num_states() > 0) {
      ts.set_initial(0);
    }
    auto issues = validate_model(ts);
    if (!issues.empty()) throw ValidationError(where + ": " + issues.front());
    std::vector<std::size_t> deps;
    if (a.contains("depends_on"))
      for (const auto& d : detail::get<std::vector<std::string>>(a.at("depends_on"), where + ".depends_on")) {
        auto it = index.find(d);
        if (it == index.end()) throw ValidationError(where + ": unknown agent '" + d + "' in depends_on");
        deps.push_back(it->second);
      }
    auto formula = detail::get<std::string>(detail::field(a, "formula", where), where + ".formula");
    const std::string name = a.contains("name") ? a.at("name").get<std::string>() : std::to_string(i + 1);
    try {
      add_agent(sc.problem, name, std::move(ts), formula, deps);
    } catch (const ParseError& e) {
      throw ParseError(where + ".formula: " + e.what(), e.location);
    }
  }
  finalize(sc.problem);
  if (root.contains("ordering")) {
    for (const auto& n : detail::get<std::vector<std::string>>(root.at("ordering"), "ordering")) {
      auto it = index.find(n);
      if (it == index.end()) throw ValidationError("ordering: unknown agent '" + n + "'");
      sc.ordering.push_back(it->second);
    }
  }
  start_execution(sc.problem, sc.ordering);  // validates the ordering
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario '" + path + "'", 0);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

/// One CSV row per logged iteration; per-class fields are ';'-separated in
/// class order, class members '+'-separated.
inline void write_metrics(std::ostream& out, const Problem& p, const Execution& e) {
  out << "iteration,classes,q_a,q_p,h,H,plan_length,ordering,backtrack_events\n";
  auto join = [](const auto& xs, const char* sep, auto&& fn) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? sep : "") + fn(xs[i]);
    return s;
  };
  auto name = [&](std::size_t a) { return p.agents[a].name; };
  for (const auto& r : e.log) {
    auto per = [&](auto get) {
      return join(r.classes, ";", [&](const ClassRecord& c) { return std::to_string(get(c)); });
    };
    out << r.iteration << ','
        << join(r.classes, ";", [&](const ClassRecord& c) { return join(c.members, "+", name); }) << ','
        << per([](const ClassRecord& c) { return c.q_a; }) << ','
        << per([](const ClassRecord& c) { return c.q_p; }) << ','
        << per([](const ClassRecord& c) { return c.h; }) << ','
        << per([](const ClassRecord& c) { return c.H; }) << ','
        << per([](const ClassRecord& c) { return c.plan_length; }) << ','
        << join(r.ordering, ">", name) << ','
        << join(r.backtrack_events, ";", [](const std::string& s) { return s; }) << '\n';
  }
}

/// `t | agent=NAME state=S event=E | q=Q` per agent and step; a closing line
/// per agent with `event=-` gives the final states.
inline void write_trace(std::ostream& out, const Problem& p, const Execution& e) {
  const std::size_t len = e.length();
  for (std::size_t t = 0; t <= len; ++t)
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto& tr = e.traces[i];
      out << t << " | agent=" << p.agents[i].name << " state=" << p.agents[i].ts.state_name(tr.states[t])
          << " event=" << (t < len ? format_event(tr.events[t], i + 1) : "-") << " | q=" << e.runs[i][t] << '\n';
    }
}

struct TraceLog {
  std::vector<Trace> traces;
  std::vector<std::vector<StateId>> runs;
};

/// Reads a log written by write_trace back into traces and runs.
inline TraceLog read_trace(std::istream& in, const Problem& p) {
  TraceLog log;
  log.traces.resize(p.size());
  log.runs.resize(p.size());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < p.size(); ++i) index[p.agents[i].name] = i;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::size_t t;
    std::string bar1, agent, state, event, bar2, q;
    std::istringstream ls(line);
    if (!(ls >> t >> bar1 >> agent >> state >> event >> bar2 >> q) || bar1 != "|" || bar2 != "|" ||
        agent.rfind("agent=", 0) || state.rfind("state=", 0) || event.rfind("event=", 0) || q.rfind("q=", 0))
      throw ParseError("trace line " + std::to_string(lineno) + ": malformed", lineno);
    auto it = index.find(agent.substr(6));
    if (it == index.end()) throw ParseError("trace line " + std::to_string(lineno) + ": unknown agent", lineno);
    const std::size_t i = it->second;
    auto s = p.agents[i].ts.find_state(state.substr(6));
    if (!s) throw UnknownStateError("trace line " + std::to_string(lineno) + ": unknown state");
    auto& tr = log.traces[i];
    if (tr.states.size() != t) throw ParseError("trace line " + std::to_string(lineno) + ": out of order", lineno);
    tr.states.push_back(*s);
    log.runs[i].push_back(static_cast<StateId>(std::stoul(q.substr(2))));
    std::string ev = event.substr(6);
    if (ev == "-") continue;
    if (!ev.empty() && ev[0] == '~') {
      tr.events.push_back(Event::eps());
    } else if (ev.size() >= 2 && ev.front() == '{' && ev.back() == '}') {
      std::set<std::string> svc;
      std::stringstream ss(ev.substr(1, ev.size() - 2));
      for (std::string x; std::getline(ss, x, ',');)
        if (!x.empty()) svc.insert(x);
      tr.events.push_back(Event::serve(svc));
    } else {
      throw ParseError("trace line " + std::to_string(lineno) + ": bad event", lineno);
    }
  }
  return log;
}

/// Accepting-visit counters after each logged iteration.
inline std::vector<std::vector<std::size_t>> counter_history(const Problem& p, const Execution& e) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> c(p.size(), 0);
  out.push_back(c);
  for (const auto& r : e.log) {
    for (std::size_t a : r.hits) ++c[a];
    out.push_back(c);
  }
  return out;
}

/// Start iterations (0-based) of windows in which the agent on top of the
/// ordering at the window start does not increase its counter.
inline std::vector<std::size_t> stalled_windows(const Problem& p, const Execution& e,
                                                const std::vector<std::size_t>& initial_ordering,
                                                std::size_t window) {
  auto counts = counter_history(p, e);
  std::vector<std::size_t> out;
  for (std::size_t start = 0; start + window <= e.log.size(); ++start) {
    std::size_t top = start == 0 ? initial_ordering.front() : e.log[start - 1].ordering.front();
    if (counts[start + window][top] <= counts[start][top]) out.push_back(start);
  }
  return out;
}

}  // namespace rhp
