#pragma once

// Line-oriented automaton exchange format.
//
//   # comment
//   states: 3
//   names: q0,q1,q2            optional, defaults to 0..n-1
//   init: q0
//   accepting: q1,q2
//   alphabet: {};{a};{a,b};{~1}
//   value: q1 (2, -1)          optional per-state annotation
//   q0 -- {a} --> q1
//
// `{}` is the empty service set and `~i` the silent marker of agent i.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rhp/automata/buchi.hpp"

namespace rhp {

/// Progress value (k, -distance). `negdist` is nullopt for minus infinity.
struct ProgressValue {
  std::size_t k = 0;
  std::optional<long> negdist;

  bool finite() const { return negdist.has_value(); }
  /// Lexicographic on (k, negdist), with minus infinity below every integer.
  auto operator<=>(const ProgressValue& o) const {
    if (k != o.k) return k <=> o.k;
    if (negdist == o.negdist) return std::strong_ordering::equal;
    if (!negdist) return std::strong_ordering::less;
    if (!o.negdist) return std::strong_ordering::greater;
    return *negdist <=> *o.negdist;
  }
  bool operator==(const ProgressValue&) const = default;
};

inline std::string to_string(const ProgressValue& v) {
  return "(" + std::to_string(v.k) + ", " + (v.negdist ? std::to_string(*v.negdist) : "-inf") +
         ")";
}

struct AnnotatedAutomaton {
  BuchiAutomaton automaton;
  std::map<StateId, ProgressValue> values;
};

namespace detail {

inline std::string trim_ws(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim_ws(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim_ws(cur));
  return out;
}

inline std::vector<std::string> parse_symbol_letters(const std::string& tok, std::size_t line) {
  if (tok.size() < 2 || tok.front() != '{' || tok.back() != '}')
    throw ParseError("line " + std::to_string(line) + ": expected {...}, got '" + tok + "'", line);
  auto inner = trim_ws(std::string_view(tok).substr(1, tok.size() - 2));
  if (inner.empty()) return {};
  auto parts = split(inner, ',');
  for (const auto& p : parts)
    if (p.empty()) throw ParseError("line " + std::to_string(line) + ": empty letter", line);
  return parts;
}

}  // namespace detail

inline AnnotatedAutomaton read_annotated_automaton(const std::string& text) {
  using detail::split;
  using detail::trim_ws;
  struct RawTransition {
    std::string src, dst, symbol;
    std::size_t line;
  };
  std::optional<std::size_t> count;
  std::vector<std::string> names;
  std::optional<std::pair<std::string, std::size_t>> init;
  std::vector<std::pair<std::string, std::size_t>> accepting;
  std::vector<std::pair<std::string, std::size_t>> alphabet;
  std::vector<std::tuple<std::string, std::string, std::size_t>> values;
  std::vector<RawTransition> transitions;

  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw ParseError("line " + std::to_string(lineno) + ": " + msg, lineno);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    std::string line = trim_ws(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (auto arrow = line.find("-->"); arrow != std::string::npos) {
      auto dash = line.find("--");
      if (dash == arrow) fail("malformed transition");
      transitions.push_back({trim_ws(line.substr(0, dash)), trim_ws(line.substr(arrow + 3)),
                             trim_ws(line.substr(dash + 2, arrow - dash - 2)), lineno});
      if (transitions.back().src.empty() || transitions.back().dst.empty())
        fail("transition needs a source and a target");
      continue;
    }
    auto colon = line.find(':');
    if (colon == std::string::npos) fail("unrecognised line '" + line + "'");
    std::string key = trim_ws(line.substr(0, colon));
    std::string val = trim_ws(line.substr(colon + 1));
    if (key == "states") {
      try {
        std::size_t used = 0;
        long n = std::stol(val, &used);
        if (used != val.size() || n < 1) throw std::invalid_argument("bad");
        count = static_cast<std::size_t>(n);
      } catch (const std::exception&) {
        fail("states: expects a positive integer");
      }
    } else if (key == "names") {
      names = split(val, ',');
    } else if (key == "init") {
      init = {val, lineno};
    } else if (key == "accepting") {
      if (!val.empty())
        for (auto& a : split(val, ',')) accepting.emplace_back(a, lineno);
    } else if (key == "alphabet") {
      if (!val.empty())
        for (auto& a : split(val, ';')) alphabet.emplace_back(a, lineno);
    } else if (key == "value") {
      auto paren = val.find('(');
      if (paren == std::string::npos) fail("value: expects 'state (k, d)'");
      values.emplace_back(trim_ws(val.substr(0, paren)), trim_ws(val.substr(paren)), lineno);
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  lineno = 0;
  if (!count) throw ParseError("missing 'states:' header", 0);
  if (!init) throw ParseError("missing 'init:' header", 0);
  if (!names.empty() && names.size() != *count)
    throw ValidationError("names: lists " + std::to_string(names.size()) + " states, expected " +
                          std::to_string(*count));
  if (names.empty())
    for (std::size_t i = 0; i < *count; ++i) names.push_back(std::to_string(i));

  std::vector<std::pair<std::vector<std::string>, std::size_t>> alpha_syms;
  std::vector<std::string> all_letters;
  for (auto& [tok, ln] : alphabet) {
    auto letters = detail::parse_symbol_letters(tok, ln);
    all_letters.insert(all_letters.end(), letters.begin(), letters.end());
    alpha_syms.emplace_back(std::move(letters), ln);
  }
  LetterTable table = sorted_table(all_letters);
  auto encode = [&](const std::vector<std::string>& letters, std::size_t ln) {
    Symbol s = 0;
    for (const auto& l : letters) {
      auto i = table.find(l);
      if (!i)
        throw ValidationError("line " + std::to_string(ln) + ": letter '" + l +
                              "' not in alphabet");
      s |= Symbol{1} << *i;
    }
    return s;
  };
  AnnotatedAutomaton out{BuchiAutomaton(table), {}};
  auto& aut = out.automaton;
  std::vector<Symbol> sigma;
  for (auto& [letters, ln] : alpha_syms) sigma.push_back(encode(letters, ln));
  aut.set_alphabet(SymbolSet(sigma));
  for (auto& n : names) aut.add_state(n);
  auto state = [&](const std::string& n, std::size_t ln) {
    auto s = aut.find_state(n);
    if (!s)
      throw ValidationError("line " + std::to_string(ln) + ": undeclared state '" + n + "'");
    return *s;
  };
  aut.set_initial(state(init->first, init->second));
  for (auto& [a, ln] : accepting) aut.set_accepting(state(a, ln));
  for (auto& t : transitions) {
    Symbol sym = encode(detail::parse_symbol_letters(t.symbol, t.line), t.line);
    StateId src = state(t.src, t.line), dst = state(t.dst, t.line);
    if (!aut.alphabet().contains(sym))
      throw ValidationError("line " + std::to_string(t.line) + ": symbol " + t.symbol +
                            " not in alphabet");
    aut.add_transition(src, sym, dst);
  }
  for (auto& [name, val, ln] : values) {
    StateId s = state(name, ln);
    auto inner = val.substr(1, val.size() >= 2 ? val.size() - 2 : 0);
    auto parts = split(inner, ',');
    if (val.back() != ')' || parts.size() != 2)
      throw ParseError("line " + std::to_string(ln) + ": value expects (k, d)", ln);
    ProgressValue v;
    try {
      v.k = std::stoul(parts[0]);
      if (parts[1] != "-inf") v.negdist = std::stol(parts[1]);
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(ln) + ": bad value numbers", ln);
    }
    out.values[s] = v;
  }
  return out;
}

inline BuchiAutomaton read_automaton(const std::string& text) {
  return read_annotated_automaton(text).automaton;
}

/// Canonical rendering: states in id order, symbols in canonical order,
/// transitions sorted by (source, symbol, target).
inline std::string write_automaton(const BuchiAutomaton& aut,
                                   const std::map<StateId, ProgressValue>& values = {}) {
  std::ostringstream out;
  const auto& L = aut.letters();
  out << "states: " << aut.num_states() << "\n";
  bool default_names = true;
  for (StateId s = 0; s < aut.num_states(); ++s)
    default_names &= aut.state_name(s) == std::to_string(s);
  if (!default_names) {
    out << "names: ";
    for (StateId s = 0; s < aut.num_states(); ++s) out << (s ? "," : "") << aut.state_name(s);
    out << "\n";
  }
  out << "init: " << aut.state_name(aut.initial()) << "\n";
  out << "accepting: ";
  bool first = true;
  for (StateId s = 0; s < aut.num_states(); ++s)
    if (aut.is_accepting(s)) {
      out << (first ? "" : ",") << aut.state_name(s);
      first = false;
    }
  out << "\n";
  out << "alphabet: ";
  first = true;
  for (Symbol sym : aut.alphabet().canonical()) {
    out << (first ? "" : ";") << L.format(sym);
    first = false;
  }
  out << "\n";
  for (const auto& [s, v] : values) out << "value: " << aut.state_name(s) << " " << to_string(v) << "\n";
  for (StateId s = 0; s < aut.num_states(); ++s) {
    std::vector<Step> steps;
    aut.for_each_transition(s, [&](Symbol sym, StateId d) { steps.push_back({sym, d}); });
    std::sort(steps.begin(), steps.end(), step_less);
    for (const auto& st : steps)
      out << aut.state_name(s) << " -- " << L.format(st.symbol) << " --> "
          << aut.state_name(st.state) << "\n";
  }
  return out.str();
}

}  // namespace rhp
