#pragma once

// The receding-horizon loop: partition, plan per class, execute one joint
// step, update automaton states, counters and the priority ordering.

#include <memory>
#include <set>
#include <stdexcept>

#include "rhp/planning/dependency.hpp"
#include "rhp/planning/product.hpp"

namespace rhp {

/// Joint configuration X: every agent's system state and automaton state.
struct JointState {
  std::vector<StateId> s, q;
  auto operator<=>(const JointState&) const = default;
};

struct ClassRecord {
  std::vector<std::size_t> members;
  std::size_t q_a = 0, q_p = 0, delta_p = 0, h = 0, H = 0, plan_length = 0;
};

struct IterationRecord {
  std::size_t iteration = 0;
  std::vector<ClassRecord> classes;
  bool full_partition = false;  // classes were recomputed at unbounded horizon
  std::vector<std::size_t> ordering;  // after the step
  std::vector<std::size_t> hits;
  std::vector<std::string> backtrack_events;
};

struct EngineConfig {
  HorizonConfig horizon;
  std::size_t iterations = 100;
};

/// One candidate first step of a class.
struct ClassCandidate {
  std::vector<StateId> s, q;  // per member
  std::vector<Event> events;
  auto key() const { return std::pair{s, q}; }
};

/// Plans a class repeatedly, each time excluding the first steps found so
/// far, to enumerate alternative first steps best plan first.
class ClassPlanner {
 public:
  ClassPlanner(const Problem& p, std::vector<std::size_t> members, const JointState& x,
               const HorizonConfig& cfg)
      : ctx_(std::make_unique<ClassContext>(make_class_context(p, std::move(members)))), cfg_(cfg) {
    for (std::size_t a : ctx_->members) {
      s0_.push_back(x.s[a]);
      q0_.push_back(x.q[a]);
    }
  }

  const ClassContext& context() const { return *ctx_; }
  const std::vector<ClassCandidate>& candidates() const { return cands_; }
  const ClassRecord& record() const { return record_; }

  /// Finds one more candidate; false when there is none.
  bool next() {
    if (exhausted_) return false;
    std::set<std::pair<std::vector<StateId>, std::vector<StateId>>> seen;
    for (const auto& c : cands_) seen.insert(c.key());
    RootFilter exclude;
    if (!seen.empty())
      exclude = [&seen](const ProductSystem& p, const ProductSystem::Edge& e) {
        return seen.count({p.ts_states(e.dst), p.intersection().comps(p.a_state(e.dst))}) > 0;
      };
    auto r = plan_class(*ctx_, s0_, q0_, cfg_, exclude);
    if (cands_.empty()) {
      record_.members = ctx_->members;
      record_.q_a = r.a->num_states();
      record_.h = r.a->horizon();
      if (r.p) {
        record_.q_p = r.p->num_states();
        record_.delta_p = r.p->num_transitions();
        record_.H = r.p->horizon();
      }
      if (r.plan) record_.plan_length = r.plan->length();
    }
    if (!r.plan) {
      exhausted_ = true;
      return false;
    }
    const auto& p = *r.p;
    StateId first = r.plan->states[1];
    ClassCandidate c;
    c.s = p.ts_states(first);
    c.q = p.intersection().comps(p.a_state(first));
    Plan one{{r.plan->states[0], first}, {r.plan->symbols[0]}, {}};
    for (std::size_t m = 0; m < ctx_->size(); ++m) c.events.push_back(project_trace(p, one, m).events[0]);
    cands_.push_back(std::move(c));
    return true;
  }

  void exhaust() {
    while (next()) {
    }
  }

 private:
  std::unique_ptr<ClassContext> ctx_;
  HorizonConfig cfg_;
  std::vector<StateId> s0_, q0_;
  std::vector<ClassCandidate> cands_;
  ClassRecord record_;
  bool exhausted_ = false;
};

/// A joint step: per agent event and the next joint configuration.
struct JointMove {
  std::vector<Event> events;
  JointState next;
};

/// Chooses the next joint step from x under `ordering`, avoiding successors
/// in `forbidden`. Returns nullopt when no class plan (or no allowed
/// combination) exists even with the unbounded-horizon partition.
inline std::optional<JointMove> choose_move(const Problem& p, const JointState& x,
                                            const std::vector<std::size_t>& ordering,
                                            const HorizonConfig& cfg,
                                            const std::set<JointState>& forbidden,
                                            IterationRecord& rec) {
  auto attempt = [&](const DependencyPartition& part) -> std::optional<JointMove> {
    std::vector<std::unique_ptr<ClassPlanner>> planners;
    rec.classes.clear();
    bool ok = true;
    for (const auto& cls : part.classes) {
      planners.push_back(std::make_unique<ClassPlanner>(p, cls, x, cfg));
      ok = planners.back()->next() && ok;
      rec.classes.push_back(planners.back()->record());
      if (!ok) return std::nullopt;
    }
    auto assemble = [&](const std::vector<std::size_t>& pick) {
      JointMove mv;
      mv.events.resize(p.size());
      mv.next = x;
      for (std::size_t c = 0; c < planners.size(); ++c) {
        const auto& cand = planners[c]->candidates()[pick[c]];
        const auto& members = planners[c]->context().members;
        for (std::size_t m = 0; m < members.size(); ++m) {
          mv.events[members[m]] = cand.events[m];
          mv.next.s[members[m]] = cand.s[m];
          mv.next.q[members[m]] = cand.q[m];
        }
      }
      return mv;
    };
    std::vector<std::size_t> pick(planners.size(), 0);
    auto first = assemble(pick);
    if (!forbidden.count(first.next)) return first;
    for (auto& pl : planners) pl->exhaust();
    // lexicographic over candidate indices, first class most significant
    for (;;) {
      std::size_t c = planners.size();
      while (c > 0) {
        --c;
        if (++pick[c] < planners[c]->candidates().size()) break;
        pick[c] = 0;
        if (c == 0) return std::nullopt;
      }
      if (planners.empty()) return std::nullopt;
      auto mv = assemble(pick);
      if (!forbidden.count(mv.next)) return mv;
    }
  };
  auto part = dependency_partition(p, x.q, cfg.h, ordering);
  if (auto mv = attempt(part)) return mv;
  auto full = dependency_partition(p, x.q, kInfinity, ordering);
  rec.full_partition = true;
  if (full == part) return std::nullopt;
  return attempt(full);
}

/// Each agent in `hits` moves to the end, in current priority order.
inline std::vector<std::size_t> reorder_priority(std::vector<std::size_t> ordering,
                                                 const std::vector<std::size_t>& hits) {
  std::vector<std::size_t> demote;
  for (std::size_t a : ordering)
    if (std::find(hits.begin(), hits.end(), a) != hits.end()) demote.push_back(a);
  for (std::size_t a : demote) {
    ordering.erase(std::find(ordering.begin(), ordering.end(), a));
    ordering.push_back(a);
  }
  return ordering;
}

/// Mask over agent i's automaton letters of the services in `events`.
inline Symbol observed_symbol(const Problem& p, std::size_t i, const std::vector<Event>& events) {
  const auto& letters = p.agents[i].spec.letters();
  Symbol obs = 0;
  for (const auto& e : events)
    if (!e.silent)
      for (const auto& svc : e.services)
        if (auto k = letters.find(svc)) obs |= Symbol{1} << *k;
  return obs;
}

/// All joint successors of x under `events`: system states as in `next`,
/// automaton states any successor on the observed services (or unchanged
/// when silent), in lexicographic order.
inline std::vector<JointState> automaton_successors(const Problem& p, const JointState& x,
                                                    const std::vector<Event>& events,
                                                    const std::vector<StateId>& next_s) {
  std::vector<std::vector<StateId>> opts(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (events[i].silent) opts[i] = {x.q[i]};
    else opts[i] = p.agents[i].spec.successors(x.q[i], observed_symbol(p, i, events));
  }
  std::vector<JointState> out;
  JointState cur{next_s, x.q};
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == p.size()) {
      out.push_back(cur);
      return;
    }
    for (StateId t : opts[i]) {
      cur.q[i] = t;
      self(self, i + 1);
    }
  };
  rec(rec, 0);
  std::sort(out.begin(), out.end());
  return out;
}

/// Everything an execution has produced so far.
struct Execution {
  std::vector<Trace> traces;
  std::vector<std::vector<StateId>> runs;
  std::vector<std::size_t> ordering;
  std::vector<std::size_t> counters;  // non-silent steps into an accepting state
  std::vector<IterationRecord> log;

  std::size_t length() const { return traces.empty() ? 0 : traces.front().length(); }
  JointState state() const {
    JointState x;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      x.s.push_back(traces[i].states.back());
      x.q.push_back(runs[i].back());
    }
    return x;
  }
};

inline Execution start_execution(const Problem& p, std::vector<std::size_t> ordering = {}) {
  Execution e;
  if (ordering.empty())
    for (std::size_t i = 0; i < p.size(); ++i) ordering.push_back(i);
  std::vector<std::size_t> sorted = ordering;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (sorted[i] != i || sorted.size() != p.size())
      throw ValidationError("ordering is not a permutation of the agents");
  e.ordering = std::move(ordering);
  for (const auto& a : p.agents) {
    e.traces.push_back(Trace{{a.ts.initial()}, {}});
    e.runs.push_back({a.spec.initial()});
  }
  e.counters.assign(p.size(), 0);
  return e;
}

/// Appends the step to the execution, checks it against the models, updates
/// counters and the ordering. Returns the agents that hit acceptance.
inline std::vector<std::size_t> apply_move(const Problem& p, Execution& e, const JointMove& mv) {
  const JointState x = e.state();
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& ev = mv.events[i];
    const auto& agent = p.agents[i];
    if (ev.silent) {
      if (!agent.ts.has_transition(x.s[i], mv.next.s[i]) || mv.next.q[i] != x.q[i])
        throw std::logic_error("silent step of agent " + agent.name + " is not a move in R");
    } else {
      if (mv.next.s[i] != x.s[i])
        throw std::logic_error("agent " + agent.name + " moved while serving");
      for (const auto& svc : ev.services)
        if (!agent.ts.labels(x.s[i]).count(svc))
          throw std::logic_error("agent " + agent.name + " served unavailable '" + svc + "'");
      if (!agent.spec.has_transition(x.q[i], observed_symbol(p, i, mv.events), mv.next.q[i]))
        throw std::logic_error("run of agent " + agent.name + " does not follow its automaton");
      if (agent.spec.is_accepting(mv.next.q[i])) hits.push_back(i);
    }
    e.traces[i].append(ev, mv.next.s[i]);
    e.runs[i].push_back(mv.next.q[i]);
  }
  for (std::size_t i : hits) ++e.counters[i];
  e.ordering = reorder_priority(e.ordering, hits);
  return hits;
}

/// Runs the loop without backtracking; throws Infeasible when a step cannot
/// be planned.
inline Execution run_plain(const Problem& p, const EngineConfig& cfg,
                           std::vector<std::size_t> ordering = {}) {
  if (cfg.iterations == 0) throw ValidationError("iterations must be at least 1");
  Execution e = start_execution(p, std::move(ordering));
  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    auto mv = choose_move(p, e.state(), e.ordering, cfg.horizon, {}, rec);
    if (!mv) throw Infeasible("no plan at iteration " + std::to_string(it));
    rec.hits = apply_move(p, e, *mv);
    rec.ordering = e.ordering;
    e.log.push_back(std::move(rec));
  }
  return e;
}

}  // namespace rhp
