#pragma once

// LTL formulas over named services: AST, parser, printer and negation
// normal form.
//
// Grammar (whitespace insignificant):
//   expr   := and ('|' and)*
//   and    := until ('&' until)*
//   until  := unary ('U' until)?          right associative
//   unary  := ('!' | 'X' | 'F' | 'G') unary | '(' expr ')' | atom
//           | 'true' | 'false'
//   atom   := [a-zA-Z_][a-zA-Z0-9_]*

#include <cctype>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rhp/error.hpp"

namespace rhp::ltl {

enum class Op { True, False, Atom, Not, And, Or, Next, Until, Release, Eventually, Always };

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

class Formula {
 public:
  Op op;
  std::string atom;  // Op::Atom only
  FormulaPtr lhs;    // unary operand or left operand
  FormulaPtr rhs;    // right operand of binary operators

  static FormulaPtr make_true() { return std::make_shared<Formula>(Formula{Op::True, {}, {}, {}}); }
  static FormulaPtr make_false() { return std::make_shared<Formula>(Formula{Op::False, {}, {}, {}}); }
  static FormulaPtr make_atom(std::string name) {
    return std::make_shared<Formula>(Formula{Op::Atom, std::move(name), {}, {}});
  }
  static FormulaPtr unary(Op op, FormulaPtr f) {
    return std::make_shared<Formula>(Formula{op, {}, std::move(f), {}});
  }
  static FormulaPtr binary(Op op, FormulaPtr l, FormulaPtr r) {
    return std::make_shared<Formula>(Formula{op, {}, std::move(l), std::move(r)});
  }

  bool is_binary() const {
    return op == Op::And || op == Op::Or || op == Op::Until || op == Op::Release;
  }
  bool is_unary() const {
    return op == Op::Not || op == Op::Next || op == Op::Eventually || op == Op::Always;
  }
};

inline FormulaPtr operator!(const FormulaPtr& f) { return Formula::unary(Op::Not, f); }
inline FormulaPtr operator&&(const FormulaPtr& a, const FormulaPtr& b) {
  return Formula::binary(Op::And, a, b);
}
inline FormulaPtr operator||(const FormulaPtr& a, const FormulaPtr& b) {
  return Formula::binary(Op::Or, a, b);
}
inline FormulaPtr X(FormulaPtr f) { return Formula::unary(Op::Next, std::move(f)); }
inline FormulaPtr F(FormulaPtr f) { return Formula::unary(Op::Eventually, std::move(f)); }
inline FormulaPtr G(FormulaPtr f) { return Formula::unary(Op::Always, std::move(f)); }
inline FormulaPtr U(FormulaPtr a, FormulaPtr b) {
  return Formula::binary(Op::Until, std::move(a), std::move(b));
}
inline FormulaPtr atom(std::string name) { return Formula::make_atom(std::move(name)); }

inline bool structurally_equal(const Formula& a, const Formula& b) {
  if (a.op != b.op) return false;
  if (a.op == Op::Atom) return a.atom == b.atom;
  if (a.is_unary()) return structurally_equal(*a.lhs, *b.lhs);
  if (a.is_binary())
    return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
  return true;
}

inline void collect_atoms(const Formula& f, std::set<std::string>& out) {
  if (f.op == Op::Atom) out.insert(f.atom);
  if (f.lhs) collect_atoms(*f.lhs, out);
  if (f.rhs) collect_atoms(*f.rhs, out);
}

inline std::set<std::string> atoms_of(const Formula& f) {
  std::set<std::string> out;
  collect_atoms(f, out);
  return out;
}

/// Number of X/U/R/F/G nodes.
inline std::size_t temporal_depth_count(const Formula& f) {
  std::size_t n = (f.op == Op::Next || f.op == Op::Until || f.op == Op::Release ||
                   f.op == Op::Eventually || f.op == Op::Always)
                      ? 1
                      : 0;
  if (f.lhs) n += temporal_depth_count(*f.lhs);
  if (f.rhs) n += temporal_depth_count(*f.rhs);
  return n;
}

/// Fully parenthesised rendering that `parse_formula` reads back unchanged.
/// Release has no surface syntax and is printed as !(!a U !b).
inline std::string to_string(const Formula& f) {
  switch (f.op) {
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::Atom: return f.atom;
    case Op::Not: return "!" + to_string(*f.lhs);
    case Op::Next: return "X " + to_string(*f.lhs);
    case Op::Eventually: return "F " + to_string(*f.lhs);
    case Op::Always: return "G " + to_string(*f.lhs);
    case Op::And: return "(" + to_string(*f.lhs) + " & " + to_string(*f.rhs) + ")";
    case Op::Or: return "(" + to_string(*f.lhs) + " | " + to_string(*f.rhs) + ")";
    case Op::Until: return "(" + to_string(*f.lhs) + " U " + to_string(*f.rhs) + ")";
    case Op::Release:
      return "!(!" + to_string(*f.lhs) + " U !" + to_string(*f.rhs) + ")";
  }
  return {};
}

inline std::string to_string(const FormulaPtr& f) { return to_string(*f); }

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, const std::set<std::string>* alphabet)
      : text_(text), alphabet_(alphabet) {}

  FormulaPtr parse() {
    auto f = parse_or();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

 private:
  std::string_view text_;
  const std::set<std::string>* alphabet_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw ParseError("syntax error at column " + std::to_string(at + 1) + ": " + msg, at + 1);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::string_view peek_ident() {
    skip_ws();
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) return {};
    std::size_t end = pos_;
    while (end < text_.size() && ident_char(text_[end])) ++end;
    return text_.substr(pos_, end - pos_);
  }

  bool accept_char(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  FormulaPtr parse_or() {
    auto f = parse_and();
    while (accept_char('|')) f = Formula::binary(Op::Or, f, parse_and());
    return f;
  }

  FormulaPtr parse_and() {
    auto f = parse_until();
    while (accept_char('&')) f = Formula::binary(Op::And, f, parse_until());
    return f;
  }

  FormulaPtr parse_until() {
    auto f = parse_unary();
    if (peek_ident() == "U") {
      pos_ += 1;
      return Formula::binary(Op::Until, f, parse_until());
    }
    return f;
  }

  FormulaPtr parse_unary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of formula");
    if (accept_char('!')) return Formula::unary(Op::Not, parse_unary());
    if (accept_char('(')) {
      auto f = parse_or();
      if (!accept_char(')')) fail("expected ')'");
      return f;
    }
    auto id = peek_ident();
    if (id.empty()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    std::size_t at = pos_;
    pos_ += id.size();
    if (id == "X") return Formula::unary(Op::Next, parse_unary());
    if (id == "F") return Formula::unary(Op::Eventually, parse_unary());
    if (id == "G") return Formula::unary(Op::Always, parse_unary());
    if (id == "U") fail("'U' needs a left operand", at);
    if (id == "true") return Formula::make_true();
    if (id == "false") return Formula::make_false();
    std::string name(id);
    if (alphabet_ && !alphabet_->count(name))
      throw ParseError("unknown atom '" + name + "' at column " + std::to_string(at + 1), at + 1);
    return Formula::make_atom(std::move(name));
  }
};

}  // namespace detail

/// Parses `text`; atoms must belong to `alphabet`.
inline FormulaPtr parse_formula(std::string_view text, const std::set<std::string>& alphabet) {
  return detail::Parser(text, &alphabet).parse();
}

/// Parses `text` accepting any atom name.
inline FormulaPtr parse_formula(std::string_view text) {
  return detail::Parser(text, nullptr).parse();
}

/// Negation normal form over {true, false, atom, !atom, &, |, X, U, R}.
/// F and G are rewritten as true U f and false R f.
inline FormulaPtr to_nnf(const FormulaPtr& f, bool negate = false) {
  using Fm = Formula;
  switch (f->op) {
    case Op::True: return negate ? Fm::make_false() : f;
    case Op::False: return negate ? Fm::make_true() : f;
    case Op::Atom: return negate ? Fm::unary(Op::Not, f) : f;
    case Op::Not: return to_nnf(f->lhs, !negate);
    case Op::And:
      return Fm::binary(negate ? Op::Or : Op::And, to_nnf(f->lhs, negate), to_nnf(f->rhs, negate));
    case Op::Or:
      return Fm::binary(negate ? Op::And : Op::Or, to_nnf(f->lhs, negate), to_nnf(f->rhs, negate));
    case Op::Next: return Fm::unary(Op::Next, to_nnf(f->lhs, negate));
    case Op::Until:
      return Fm::binary(negate ? Op::Release : Op::Until, to_nnf(f->lhs, negate),
                        to_nnf(f->rhs, negate));
    case Op::Release:
      return Fm::binary(negate ? Op::Until : Op::Release, to_nnf(f->lhs, negate),
                        to_nnf(f->rhs, negate));
    case Op::Eventually:
      return negate ? Fm::binary(Op::Release, Fm::make_false(), to_nnf(f->lhs, true))
                    : Fm::binary(Op::Until, Fm::make_true(), to_nnf(f->lhs, false));
    case Op::Always:
      return negate ? Fm::binary(Op::Until, Fm::make_true(), to_nnf(f->lhs, true))
                    : Fm::binary(Op::Release, Fm::make_false(), to_nnf(f->lhs, false));
  }
  return f;
}

}  // namespace rhp::ltl
