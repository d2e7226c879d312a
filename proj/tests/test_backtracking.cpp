#include <catch_amalgamated.hpp>

#include <random>

#include "rhp/planning/backtracking.hpp"
#include "rhp/planning/centralized.hpp"
#include "support.hpp"

using namespace rhp;

namespace {

TransitionSystem one_state(const std::string& svc) {
  TransitionSystem ts({svc});
  ts.add_state("s", {svc});
  ts.add_transition(0, 0);
  ts.set_initial(0);
  return ts;
}

// 0 -> 1 -> {2, 3}, 2 <-> 1, 3 sink; service only at 0.
TransitionSystem branching() {
  TransitionSystem ts({"a"});
  ts.add_state("s0", {"a"});
  for (int i = 1; i < 4; ++i) ts.add_state("s" + std::to_string(i), {});
  ts.add_transition(0, 1);
  ts.add_transition(1, 0);
  ts.add_transition(1, 2);
  ts.add_transition(2, 1);
  ts.add_transition(1, 3);
  ts.add_transition(3, 3);
  ts.set_initial(0);
  return ts;
}

Snapshot silent_step(StateId from, StateId to) {
  Snapshot s;
  s.before = {{from}, {0}};
  s.after = {{to}, {0}};
  s.events = {Event::eps()};
  return s;
}

bool sat_from(const Problem& p, const JointState& x) {
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < p.size(); ++i) all.push_back(i);
  return solve_class(p, all, x.s, x.q).has_value();
}

}  // namespace

TEST_CASE("compress excises cycles", "[backtracking]") {
  Problem p;
  add_agent(p, "x", branching(), "G F a");
  finalize(p);
  // A B C B D with A=0, B=1, C=2, D=3
  History plain{silent_step(0, 1), silent_step(1, 3)};
  CHECK(compress(plain).size() == 2);
  History cyc{silent_step(0, 1), silent_step(1, 2), silent_step(2, 1), silent_step(1, 3)};
  auto c = compress(cyc);
  REQUIRE(c.size() == 2);
  CHECK(c[0].before.s == std::vector<StateId>{0});
  CHECK(c[1].before.s == std::vector<StateId>{1});
  CHECK(c[1].after.s == std::vector<StateId>{3});
  CHECK(replays(p, cyc));
  CHECK(replays(p, c));
  CHECK(cyc.back().after == c.back().after);
  History broken{silent_step(0, 1), silent_step(2, 1)};
  CHECK_FALSE(replays(p, broken));
}

TEST_CASE("unreachable goal is infeasible without backtracking", "[backtracking]") {
  Problem p;
  TransitionSystem ts({"a"});
  ts.add_state("s", {});
  ts.add_transition(0, 0);
  ts.set_initial(0);
  add_agent(p, "x", ts, "F a");
  finalize(p);
  CHECK_THROWS_AS(run_with_backtracking(p, {{}, 10}), Infeasible);
}

TEST_CASE("alternative automaton successor is taken before rewinding", "[backtracking]") {
  Problem p;
  add_agent(p, "x", one_state("a"), "G F a");
  finalize(p);
  // q0 -a-> q1 (accepting, loops) and q0 -a-> q2 (no successors)
  BuchiAutomaton b(LetterTable({"a"}));
  for (int i = 0; i < 3; ++i) b.add_state();
  b.set_initial(0);
  b.set_accepting(1);
  b.add_transition(0, 1, 1);
  b.add_transition(0, 1, 2);
  b.add_transition(1, 1, 1);
  p.agents[0].spec = b;
  REQUIRE(b.successors(0, 1).size() == 2);

  BacktrackingExecution run{start_execution(p), {}, {}, 0};
  const JointState start = run.exec.state();
  detail::step(p, run, {{Event::serve({"a"})}, {{0}, {2}}});
  IterationRecord rec;
  CHECK_FALSE(choose_move(p, run.exec.state(), run.exec.ordering, {}, {}, rec));

  auto what = backtrack(p, run);
  CHECK(what.find("alternative") != std::string::npos);
  CHECK(run.exec.state().q == std::vector<StateId>{1});
  CHECK(run.exec.length() == 1);
  CHECK(run.history.size() == 1);
  CHECK(run.forbidden[start].count({{0}, {2}}));
  // exhaustive: q2 is a dead end, q1 reaches acceptance
  CHECK(b.successors(2, 0).empty());
  CHECK(b.successors(2, 1).empty());
  CHECK(sat_from(p, run.exec.state()));
  CHECK(choose_move(p, run.exec.state(), run.exec.ordering, {}, {}, rec));
  CHECK(replays(p, run.history));
}

TEST_CASE("wrong move is forbidden and the replan avoids it", "[backtracking]") {
  Problem p;
  add_agent(p, "x", one_state("a"), "G F a");
  // y: t0 serves b and leads to t1, which never can
  TransitionSystem ts({"b"});
  ts.add_state("t0", {"b"});
  ts.add_state("t1", {});
  ts.add_transition(0, 1);
  ts.add_transition(1, 1);
  ts.set_initial(0);
  add_agent(p, "y", ts, "G F b");
  finalize(p);
  BacktrackingExecution run{start_execution(p), {}, {}, 0};
  const JointState start = run.exec.state();
  JointState wrong = start;
  wrong.s[1] = 1;
  wrong.q[0] = p.agents[0].spec.successors(start.q[0], 1).front();
  detail::step(p, run, {{Event::serve({"a"}), Event::eps()}, wrong});
  CHECK(sat_from(p, start));
  CHECK_FALSE(sat_from(p, wrong));
  IterationRecord rec;
  CHECK_FALSE(choose_move(p, wrong, run.exec.ordering, {}, {}, rec));

  // every other automaton successor of x is tried first, each still stuck
  const auto alternatives = automaton_successors(p, start, {Event::serve({"a"}), Event::eps()}, wrong.s);
  std::set<JointState> tried{wrong};
  auto what = backtrack(p, run);
  while (what.find("alternative") != std::string::npos) {
    CHECK(tried.insert(run.exec.state()).second);
    CHECK_FALSE(choose_move(p, run.exec.state(), run.exec.ordering, {}, {}, rec));
    what = backtrack(p, run);
  }
  CHECK(what.find("rewind") != std::string::npos);
  CHECK(tried == std::set<JointState>(alternatives.begin(), alternatives.end()));
  CHECK(run.exec.state() == start);
  CHECK(run.exec.length() == 0);
  CHECK(run.exec.counters == std::vector<std::size_t>{0, 0});
  CHECK(run.history.empty());
  CHECK(run.forbidden[start] == tried);

  auto mv = choose_move(p, start, run.exec.ordering, {}, run.forbidden[start], rec);
  REQUIRE(mv);
  CHECK_FALSE(tried.count(mv->next));
  CHECK(sat_from(p, mv->next));
}

TEST_CASE("backtracking runs keep their invariants", "[backtracking][property]") {
  testing::FormulaGen gen({"a", "b"}, 41);
  std::mt19937 rng(43);
  std::size_t ran = 0, infeasible = 0;
  for (int iter = 0; iter < 60; ++iter) {
    Problem p;
    auto random_ts = [&](const std::string& svc) {
      std::size_t n = 1 + rng() % 4;
      TransitionSystem ts({svc});
      for (std::size_t i = 0; i < n; ++i)
        ts.add_state("s" + std::to_string(i), rng() % 2 ? std::set<std::string>{svc} : std::set<std::string>{});
      for (StateId i = 0; i < n; ++i) {
        ts.add_transition(i, static_cast<StateId>((i + 1) % n));
        if (rng() % 2) ts.add_transition(i, i);
      }
      ts.set_initial(0);
      return ts;
    };
    add_agent(p, "x", random_ts("a"), ltl::to_string(gen.next(3, 3)));
    add_agent(p, "y", random_ts("b"), ltl::to_string(gen.next(3, 3)));
    finalize(p);
    const bool solvable = solve_centralized(p).has_value();
    BacktrackingExecution run;
    try {
      run = run_with_backtracking(p, {{2, 3, 6, 8}, 15});
    } catch (const Infeasible&) {
      ++infeasible;
      // soundness: never declared infeasible when a solution exists
      CHECK_FALSE(solvable);
      continue;
    } catch (const BudgetExceeded&) {
      continue;
    }
    ++ran;
    CHECK(replays(p, run.history));
    std::set<JointState> starts;
    for (const auto& s : run.history) CHECK(starts.insert(s.before).second);
    if (!run.history.empty()) CHECK(run.history.back().after == run.exec.state());
    std::size_t events = 0;
    for (const auto& r : run.exec.log) events += r.backtrack_events.size();
    CHECK(events == run.backtracks);
    std::size_t forbids = 0;
    for (const auto& [x, f] : run.forbidden) forbids += f.size();
    CHECK(forbids == run.backtracks);
  }
  CHECK(ran >= 20);
  CHECK(infeasible >= 1);
}
