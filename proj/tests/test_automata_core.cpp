#include <catch_amalgamated.hpp>

#include <random>

#include "rhp/automata/buchi.hpp"
#include "rhp/automata/exchange_format.hpp"
#include "rhp/ltl/lasso_eval.hpp"
#include "rhp/ltl/translate.hpp"
#include "support.hpp"

using namespace rhp;

namespace {

BuchiAutomaton random_automaton(std::mt19937& rng, std::size_t n, const LetterTable& letters,
                                double density) {
  BuchiAutomaton aut(letters);
  for (std::size_t i = 0; i < n; ++i) aut.add_state();
  aut.set_initial(0);
  std::bernoulli_distribution acc(0.3), edge(density);
  for (StateId s = 0; s < n; ++s) {
    aut.set_accepting(s, acc(rng));
    for (StateId d = 0; d < n; ++d)
      for (Symbol sym = 0; sym <= letters.all(); ++sym)
        if (edge(rng)) aut.add_transition(s, sym, d);
  }
  return aut;
}

// Floyd-Warshall hop distances; the diagonal is 0.
std::vector<std::vector<std::size_t>> all_pairs(const BuchiAutomaton& aut) {
  const std::size_t n = aut.num_states();
  std::vector<std::vector<std::size_t>> d(n, std::vector<std::size_t>(n, kInfinity));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& e : aut.edges()) d[e.src][e.dst] = std::min<std::size_t>(d[e.src][e.dst], 1);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] != kInfinity && d[k][j] != kInfinity)
          d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

// Accepting lasso exists iff some reachable accepting state qf reaches an
// edge u -> v with a qualifying symbol, and v reaches qf back.
template <class Pred>
bool lasso_oracle(const BuchiAutomaton& aut, Pred qualifies) {
  auto d = all_pairs(aut);
  StateId init = aut.initial();
  for (StateId qf = 0; qf < aut.num_states(); ++qf) {
    if (!aut.is_accepting(qf) || d[init][qf] == kInfinity) continue;
    for (const auto& e : aut.edges())
      for (Symbol s : e.label)
        if (qualifies(s) && d[qf][e.src] != kInfinity && d[e.dst][qf] != kInfinity) return true;
  }
  return false;
}

bool path_valid(const BuchiAutomaton& aut, const Path& p) {
  StateId cur = p.start;
  for (const auto& st : p.steps) {
    if (!aut.has_transition(cur, st.symbol, st.state)) return false;
    cur = st.state;
  }
  return true;
}

}  // namespace

TEST_CASE("reachable_in_k basics") {
  LetterTable t = sorted_table({"a"});
  BuchiAutomaton cyc(t);
  auto q1 = cyc.add_state("q1"), q2 = cyc.add_state("q2");
  cyc.add_transition(q1, 1, q2);
  cyc.add_transition(q2, 1, q1);
  CHECK(reachable_in_k(cyc, q1, 0) == std::set<StateId>{q1});
  CHECK(reachable_in_k(cyc, q1, 2) == std::set<StateId>{q1});
  CHECK(reachable_in_k(cyc, q1, 1) == std::set<StateId>{q2});

  BuchiAutomaton chain(t);
  auto c1 = chain.add_state(), c2 = chain.add_state(), c3 = chain.add_state();
  chain.add_transition(c1, 0, c2);
  chain.add_transition(c2, 0, c3);
  CHECK(reachable_in_k(chain, c1, 5).empty());
  CHECK(reachable_in_k(chain, c1, 2) == std::set<StateId>{c3});
  CHECK_THROWS_AS(reachable_in_k(chain, 7, 1), UnknownStateError);
}

TEST_CASE("distance basics") {
  LetterTable t = sorted_table({"a"});
  BuchiAutomaton g(t);
  auto a = g.add_state(), b = g.add_state(), c = g.add_state();
  g.add_transition(a, 1, b);
  CHECK(distance(g, a, a) == 0);
  CHECK(distance(g, a, b) == 1);
  CHECK(distance(g, a, c) == kInfinity);
  CHECK(distance(g, b, a) == kInfinity);
  CHECK_THROWS_AS(distance(g, a, 9), UnknownStateError);
}

TEST_CASE("shortest_path tie-break on a diamond") {
  LetterTable t = sorted_table({"a", "b"});
  const Symbol A = 1, B = 2;
  BuchiAutomaton g(t);
  auto s = g.add_state("s"), l = g.add_state("l"), r = g.add_state("r"), goal = g.add_state("g");
  // routes s -{b}-> l -> g and s -{a}-> r -> g; {a} < {b} canonically
  g.add_transition(s, B, l);
  g.add_transition(s, A, r);
  g.add_transition(l, A, goal);
  g.add_transition(r, B, goal);
  auto p = shortest_path(g, s, [&](StateId x) { return x == goal; });
  REQUIRE(p);
  CHECK(p->length() == 2);
  CHECK(p->steps[0] == Step{A, r});
  CHECK(p->steps[1] == Step{B, goal});

  auto zero = shortest_path(g, s, [&](StateId x) { return x == s; });
  REQUIRE(zero);
  CHECK(zero->length() == 0);
  CHECK_FALSE(shortest_path(g, goal, [&](StateId x) { return x == s; }));

  // The edge filter can force the other route.
  auto filtered = shortest_path(g, s, [&](StateId x) { return x == goal; },
                                [&](StateId, Symbol sym, StateId d) { return !(sym == A && d == r); });
  REQUIRE(filtered);
  CHECK(filtered->steps[0] == Step{B, l});
}

TEST_CASE("canonical symbol order is lexicographic on names") {
  LetterTable t = sorted_table({"b", "a", "c"});
  auto sym = [&](std::set<std::string> s) { return t.encode(s); };
  CHECK(symbol_less(sym({}), sym({"a"})));
  CHECK(symbol_less(sym({"a"}), sym({"a", "b"})));
  CHECK(symbol_less(sym({"a", "b"}), sym({"a", "c"})));
  CHECK(symbol_less(sym({"a", "c"}), sym({"b"})));
  CHECK_FALSE(symbol_less(sym({"b"}), sym({"b"})));
}

TEST_CASE("find_accepting_lasso basics") {
  LetterTable t = sorted_table({"a", "~1"});
  const Symbol A = t.encode({"a"}), EPS = t.encode({"~1"});
  BuchiAutomaton one(t);
  auto q = one.add_state();
  one.set_initial(q);
  one.set_accepting(q);
  one.add_transition(q, A, q);
  auto l = find_accepting_lasso(one);
  REQUIRE(l);
  CHECK(l->prefix.length() == 0);
  CHECK(l->cycle.length() == 1);
  CHECK(l->cycle.steps[0].symbol == A);

  BuchiAutomaton silent(t);
  auto s0 = silent.add_state(), s1 = silent.add_state();
  silent.set_initial(s0);
  silent.set_accepting(s1);
  silent.add_transition(s0, A, s1);
  silent.add_transition(s1, EPS, s1);
  CHECK(find_accepting_lasso(silent, false));
  CHECK_FALSE(find_accepting_lasso(silent, true));

  auto fa = ltl::translate_to_buchi(ltl::parse_formula("F a"));
  auto lasso = find_accepting_lasso(fa);
  REQUIRE(lasso);
  std::vector<Symbol> pre, loop;
  for (auto& st : lasso->prefix.steps) pre.push_back(st.symbol);
  for (auto& st : lasso->cycle.steps) loop.push_back(st.symbol);
  CHECK(ltl::evaluate_lasso(ltl::parse_formula("F a"), testing::to_word(fa.letters(), pre),
                            testing::to_word(fa.letters(), loop)));
}

TEST_CASE("graph properties on random automata") {
  std::mt19937 rng(11);
  LetterTable t = sorted_table({"a", "~1"});
  for (int round = 0; round < 300; ++round) {
    std::size_t n = 1 + rng() % 8;
    double density = std::uniform_real_distribution<>(0.02, 0.25)(rng);
    auto aut = random_automaton(rng, n, t, density);
    auto d = all_pairs(aut);

    for (StateId q = 0; q < n; ++q) {
      // reachable_in_k(k+1) = image of reachable_in_k(k)
      for (std::size_t k = 0; k <= n; ++k) {
        std::set<StateId> img;
        for (StateId s : reachable_in_k(aut, q, k))
          aut.for_each_transition(s, [&](Symbol, StateId x) { img.insert(x); });
        REQUIRE(reachable_in_k(aut, q, k + 1) == img);
      }
      for (StateId r = 0; r < n; ++r) {
        REQUIRE(distance(aut, q, r) == d[q][r]);
        for (StateId m = 0; m < n; ++m)
          if (d[q][m] != kInfinity && d[m][r] != kInfinity)
            REQUIRE(distance(aut, q, r) <= d[q][m] + d[m][r]);
        auto p = shortest_path(aut, q, [&](StateId x) { return x == r; });
        REQUIRE(p.has_value() == (d[q][r] != kInfinity));
        if (p) {
          REQUIRE(p->length() == d[q][r]);
          REQUIRE(p->end() == r);
          REQUIRE(path_valid(aut, *p));
        }
      }
    }

    for (bool non_silent : {false, true}) {
      auto qual = [&](Symbol s) { return !non_silent || !aut.is_silent_symbol(s); };
      auto l = find_accepting_lasso(aut, non_silent);
      REQUIRE(l.has_value() == lasso_oracle(aut, qual));
      if (l) {
        REQUIRE(l->prefix.start == aut.initial());
        REQUIRE(aut.is_accepting(l->prefix.end()));
        REQUIRE(path_valid(aut, l->prefix));
        REQUIRE(l->cycle.start == l->prefix.end());
        REQUIRE(l->cycle.end() == l->cycle.start);
        REQUIRE(l->cycle.length() >= 1);
        REQUIRE(path_valid(aut, l->cycle));
        bool any = false;
        for (auto& st : l->cycle.steps) any |= qual(st.symbol);
        REQUIRE(any);
        // prefix is a simple path
        auto st = l->prefix.states();
        std::set<StateId> uniq(st.begin(), st.end());
        REQUIRE(uniq.size() == st.size());
      }
    }
  }
}

TEST_CASE("exchange format round trip") {
  const std::string text =
      "# F a\n"
      "states: 2\n"
      "names: q0,q1\n"
      "init: q0\n"
      "accepting: q1\n"
      "alphabet: {};{a}\n"
      "q0 -- {} --> q0\n"
      "q0 -- {a} --> q1\n"
      "q1 -- {} --> q1\n"
      "q1 -- {a} --> q1\n";
  auto aut = read_automaton(text);
  CHECK(aut.num_states() == 2);
  int acc = 0;
  for (StateId s = 0; s < aut.num_states(); ++s) acc += aut.is_accepting(s);
  CHECK(acc == 1);
  auto canon = write_automaton(aut);
  CHECK(write_automaton(read_automaton(canon)) == canon);
  CHECK(canon == text.substr(text.find("states")));

  // Transitions listed out of order come back sorted.
  const std::string shuffled =
      "states: 2\ninit: 0\naccepting: 1\nalphabet: {a};{}\n"
      "1 -- {a} --> 1\n0 -- {a} --> 1\n0 -- {} --> 0\n";
  CHECK(write_automaton(read_automaton(shuffled)) ==
        "states: 2\ninit: 0\naccepting: 1\nalphabet: {};{a}\n"
        "0 -- {} --> 0\n0 -- {a} --> 1\n1 -- {a} --> 1\n");
}

TEST_CASE("exchange format silent markers and values") {
  const std::string text =
      "states: 2\ninit: 0\naccepting: 1\nalphabet: {};{a};{~1}\n"
      "value: 0 (1, -1)\nvalue: 1 (1, -inf)\n"
      "0 -- {a} --> 1\n0 -- {~1} --> 0\n";
  auto ann = read_annotated_automaton(text);
  CHECK(ann.automaton.letters().silent_mask() != 0);
  CHECK(ann.values.at(0) == ProgressValue{1, -1});
  CHECK_FALSE(ann.values.at(1).finite());
  CHECK(write_automaton(ann.automaton, ann.values) == text);
}

TEST_CASE("exchange format errors") {
  CHECK_THROWS_AS(read_automaton("states: 1\ninit: 0\naccepting:\nalphabet: {}\n0 -- {} --> 3\n"),
                  ValidationError);
  try {
    read_automaton("states: 1\ninit: 0\nbogus line\n");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.location == 3);
  }
  CHECK_THROWS_AS(read_automaton("states: x\ninit: 0\n"), ParseError);
  CHECK_THROWS_AS(read_automaton("states: 1\ninit: 0\nalphabet: {a}\n0 -- {b} --> 0\n"),
                  ValidationError);
  CHECK_THROWS_AS(read_automaton("states: 1\ninit: 0\nalphabet: {a}\n0 -- a --> 0\n"), ParseError);
  CHECK_THROWS_AS(read_automaton("states: 1\n"), ParseError);
}

TEST_CASE("progress values compare lexicographically") {
  ProgressValue inf{3, std::nullopt};
  CHECK(ProgressValue{2, 0} > ProgressValue{1, 0});
  CHECK(ProgressValue{2, -5} > ProgressValue{1, 0});
  CHECK(ProgressValue{1, -1} > ProgressValue{1, -2});
  CHECK(ProgressValue{3, -100} > inf);
  CHECK(inf > ProgressValue{2, 0});
}

TEST_CASE("trim and bisimulation preserve the language") {
  std::mt19937 rng(5);
  LetterTable t = sorted_table({"a"});
  for (int round = 0; round < 100; ++round) {
    auto aut = random_automaton(rng, 1 + rng() % 6, t, 0.2);
    auto small = ltl::reduce_bisimulation(trim(aut));
    CHECK(small.num_states() <= aut.num_states());
    for (const auto& p : testing::all_words(t, 0, 2))
      for (const auto& l : testing::all_words(t, 1, 3))
        REQUIRE(accepts_lasso(aut, p, l) == accepts_lasso(small, p, l));
  }
}
