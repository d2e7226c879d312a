#pragma once

// A planning instance: agents with transition systems, service sets and LTL
// tasks, each task compiled to a Büchi automaton over its atoms.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rhp/agent/transition_system.hpp"
#include "rhp/automata/buchi.hpp"
#include "rhp/ltl/formula.hpp"
#include "rhp/ltl/translate.hpp"

namespace rhp {

struct Agent {
  std::string name;
  TransitionSystem ts;
  ltl::FormulaPtr formula;         // may be null when only `spec` is given
  BuchiAutomaton spec;             // over the formula's atoms
  std::vector<std::size_t> depends_on;  // d(i), 0-based agent indices, includes i
};

struct Problem {
  std::vector<Agent> agents;

  std::size_t size() const { return agents.size(); }

  /// Index of the agent owning `service`, or size() when nobody does.
  std::size_t owner_of(const std::string& service) const {
    for (std::size_t i = 0; i < agents.size(); ++i)
      if (agents[i].ts.services().count(service)) return i;
    return agents.size();
  }

  /// Silent marker of agent i (0-based) in letter form.
  static std::string marker(std::size_t i) { return silent_marker(i + 1); }
};

/// Adds agent i with task `formula_text`. When `depends_on` is empty it is
/// derived from the owners of the formula's atoms. Throws ValidationError if
/// the formula mentions a service outside the dependency set.
inline void add_agent(Problem& p, std::string name, TransitionSystem ts,
                      const std::string& formula_text, std::vector<std::size_t> depends_on = {}) {
  Agent a;
  a.name = std::move(name);
  a.ts = std::move(ts);
  a.formula = ltl::parse_formula(formula_text);
  a.depends_on = std::move(depends_on);
  p.agents.push_back(std::move(a));
}

/// Finalises a problem after all agents are added: resolves dependency
/// sets, checks service disjointness and compiles the automata.
inline void finalize(Problem& p) {
  std::map<std::string, std::size_t> owner;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (const auto& s : p.agents[i].ts.services()) {
      if (is_silent_marker(s)) throw ValidationError("service names may not start with '~'");
      if (!owner.emplace(s, i).second)
        throw ValidationError("service '" + s + "' belongs to agents " +
                              p.agents[owner[s]].name + " and " + p.agents[i].name);
    }
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto& a = p.agents[i];
    if (a.formula.get() == nullptr) throw ValidationError("agent " + a.name + " has no task");
    std::set<std::size_t> d(a.depends_on.begin(), a.depends_on.end());
    bool derive = d.empty();
    d.insert(i);
    for (const auto& atom : ltl::atoms_of(*a.formula)) {
      auto it = owner.find(atom);
      if (it == owner.end())
        throw ValidationError("agent " + a.name + ": formula mentions unknown service '" + atom +
                              "'");
      if (derive) d.insert(it->second);
      else if (!d.count(it->second))
        throw ValidationError("agent " + a.name + ": service '" + atom +
                              "' is outside the dependency set");
    }
    for (std::size_t j : d)
      if (j >= p.size()) throw ValidationError("agent " + a.name + ": bad dependency index");
    a.depends_on.assign(d.begin(), d.end());
    a.spec = ltl::translate_to_buchi(a.formula);
  }
}

}  // namespace rhp
