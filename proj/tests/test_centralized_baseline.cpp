#include <catch_amalgamated.hpp>

#include <random>

#include "joint_search.hpp"
#include "rhp/planning/centralized.hpp"
#include "support.hpp"

using namespace rhp;

namespace {

TransitionSystem corridor(std::size_t n, std::set<std::string> services,
                          std::map<std::size_t, std::set<std::string>> labels) {
  TransitionSystem ts(services);
  for (std::size_t i = 0; i < n; ++i) ts.add_state("c" + std::to_string(i), labels[i]);
  for (StateId i = 0; i < n; ++i) {
    ts.add_transition(i, i);
    if (i + 1 < n) {
      ts.add_transition(i, i + 1);
      ts.add_transition(i + 1, i);
    }
  }
  ts.set_initial(0);
  return ts;
}

TransitionSystem random_ts(std::mt19937& rng, std::size_t n, const std::string& svc) {
  TransitionSystem ts({svc});
  for (std::size_t i = 0; i < n; ++i)
    ts.add_state("s" + std::to_string(i), rng() % 2 ? std::set<std::string>{svc} : std::set<std::string>{});
  for (StateId i = 0; i < n; ++i) {
    ts.add_transition(i, static_cast<StateId>((i + 1) % n));
    if (rng() % 2) ts.add_transition(i, i);
    if (rng() % 3 == 0) ts.add_transition(i, static_cast<StateId>(rng() % n));
  }
  ts.set_initial(0);
  return ts;
}

// Checks a class solution against the models and the formulas, treating the
// class members as the whole team.
void verify(const Problem& p, const ClassSolution& sol) {
  const std::size_t k = sol.members.size();
  std::vector<std::vector<Event>> pre(k), cyc(k);
  for (std::size_t m = 0; m < k; ++m) {
    const auto& al = sol.agents[m];
    const auto& ts = p.agents[al.agent].ts;
    CHECK(check_trace(ts, al.prefix).empty());
    Trace loop{{al.prefix.states.back()}, {}};
    for (std::size_t j = 0; j < al.cycle.size(); ++j) loop.append(al.cycle[j], al.cycle_states[j]);
    REQUIRE(!al.cycle.empty());
    CHECK(al.cycle_states.back() == al.prefix.states.back());
    CHECK(al.run_cycle.back() == al.run_prefix.back());
    // the cycle is itself a legal continuation
    for (std::size_t j = 0; j < loop.length(); ++j) {
      if (loop.events[j].silent) CHECK(ts.has_transition(loop.states[j], loop.states[j + 1]));
      else CHECK(loop.states[j] == loop.states[j + 1]);
    }
    pre[m] = al.prefix.events;
    cyc[m] = al.cycle;
  }
  Problem sub;
  for (std::size_t a : sol.members) sub.agents.push_back(p.agents[a]);
  CHECK(testing::satisfies_all(sub, pre, cyc));
}

}  // namespace

TEST_CASE("singleton class with a recurring goal", "[centralized]") {
  Problem p;
  add_agent(p, "x", corridor(3, {"a"}, {{2, {"a"}}}), "G F a");
  finalize(p);
  auto sol = solve_centralized(p);
  REQUIRE(sol);
  REQUIRE(sol->size() == 1);
  verify(p, sol->front());
  // at most |S| * |Q| * (n + 1) states
  CHECK(sol->front().product_states <= 3 * p.agents[0].spec.num_states() * 2);
}

TEST_CASE("example pair on one-state worlds", "[centralized]") {
  Problem p;
  add_agent(p, "one", corridor(1, {"a"}, {{0, {"a"}}}), "a & X (a & b)");
  add_agent(p, "two", corridor(1, {"b"}, {{0, {"b"}}}), "b & X (b & a)");
  finalize(p);
  auto sol = solve_centralized(p);
  REQUIRE(sol);
  REQUIRE(sol->size() == 1);
  CHECK(sol->front().members == std::vector<std::size_t>{0, 1});
  verify(p, sol->front());
  // brute force agrees
  CHECK(testing::bounded_joint_lasso(p, 3).has_value());
}

TEST_CASE("unsatisfiable specifications have no lasso", "[centralized]") {
  Problem p;
  add_agent(p, "x", corridor(3, {"a"}, {}), "F a");
  finalize(p);
  CHECK_FALSE(solve_centralized(p));

  Problem q;
  add_agent(q, "x", corridor(2, {"a"}, {}), "G F !a");
  add_agent(q, "y", corridor(2, {"b"}, {{1, {"b"}}}), "G F b & F a");
  finalize(q);
  CHECK_FALSE(solve_centralized(q));
}

TEST_CASE("state cap raises budget errors", "[centralized]") {
  Problem p;
  add_agent(p, "x", corridor(6, {"a"}, {{5, {"a"}}}), "G F a");
  add_agent(p, "y", corridor(6, {"b"}, {{5, {"b"}}}), "G F (b & X a)");
  finalize(p);
  CHECK_THROWS_AS(solve_centralized(p, 20), BudgetExceeded);
  CHECK(solve_centralized(p).has_value());
}

TEST_CASE("size report", "[centralized]") {
  Problem p;
  for (int i = 0; i < 3; ++i) {
    std::string svc(1, static_cast<char>('a' + i));
    add_agent(p, svc, corridor(144, {svc}, {{0, {svc}}}), "G F " + svc);
  }
  Problem one;
  add_agent(one, "x", corridor(10, {"a"}, {{0, {"a"}}}), "G F a");
  finalize(p);
  finalize(one);
  auto full = size_report(p, {{0, 1, 2}});
  CHECK(full[0].analytic == 2985984.0);
  CHECK_FALSE(full[0].materialized);
  CHECK(size_report(p, {{0, 1}})[0].analytic == 20736.0);
  auto single = size_report(one, {{0}}, 1000);
  CHECK(single[0].analytic == 10.0);
  REQUIRE(single[0].materialized);
  CHECK(*single[0].materialized >= 10);
}

TEST_CASE("centralized agrees with brute-force joint search", "[centralized][property]") {
  testing::FormulaGen gen({"a", "b"}, 11), gen_a({"a"}, 12);
  std::mt19937 rng(5);
  std::size_t solvable = 0, unsolvable = 0;
  for (int iter = 0; iter < 120; ++iter) {
    Problem p;
    const bool two = iter % 2;
    auto& g = two ? gen : gen_a;
    add_agent(p, "x", random_ts(rng, 1 + rng() % (two ? 2 : 5), "a"), ltl::to_string(g.next(3, 3)));
    if (two) add_agent(p, "y", random_ts(rng, 1 + rng() % 2, "b"), ltl::to_string(g.next(3, 3)));
    finalize(p);
    auto sol = solve_centralized(p);
    auto brute = testing::bounded_joint_lasso(p, two ? 3 : 5);
    INFO(ltl::to_string(p.agents[0].formula));
    if (brute) CHECK(sol.has_value());
    if (sol) {
      ++solvable;
      for (const auto& c : *sol) verify(p, c);
    } else {
      ++unsolvable;
    }
  }
  CHECK(solvable > 10);
  CHECK(unsolvable > 3);
}
