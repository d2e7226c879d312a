#pragma once

// Exact LTL satisfaction on ultimately periodic words prefix·loop^ω.

#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "rhp/ltl/formula.hpp"

namespace rhp::ltl {

using Letterset = std::set<std::string>;
using Word = std::vector<Letterset>;

namespace detail {

class LassoEvaluator {
 public:
  LassoEvaluator(const Word& prefix, const Word& loop) : prefix_len_(prefix.size()) {
    positions_.insert(positions_.end(), prefix.begin(), prefix.end());
    positions_.insert(positions_.end(), loop.begin(), loop.end());
  }

  const std::vector<char>& eval(const Formula& f) {
    if (auto it = memo_.find(&f); it != memo_.end()) return it->second;
    const std::size_t n = positions_.size();
    std::vector<char> v(n, 0);
    switch (f.op) {
      case Op::True: v.assign(n, 1); break;
      case Op::False: break;
      case Op::Atom:
        for (std::size_t i = 0; i < n; ++i) v[i] = positions_[i].count(f.atom) ? 1 : 0;
        break;
      case Op::Not: {
        const auto& a = eval(*f.lhs);
        for (std::size_t i = 0; i < n; ++i) v[i] = !a[i];
        break;
      }
      case Op::And: {
        const auto a = eval(*f.lhs);
        const auto& b = eval(*f.rhs);
        for (std::size_t i = 0; i < n; ++i) v[i] = a[i] && b[i];
        break;
      }
      case Op::Or: {
        const auto a = eval(*f.lhs);
        const auto& b = eval(*f.rhs);
        for (std::size_t i = 0; i < n; ++i) v[i] = a[i] || b[i];
        break;
      }
      case Op::Next: {
        const auto& a = eval(*f.lhs);
        for (std::size_t i = 0; i < n; ++i) v[i] = a[succ(i)];
        break;
      }
      case Op::Until: v = until(eval(*f.lhs), eval(*f.rhs)); break;
      case Op::Eventually: v = until(std::vector<char>(n, 1), eval(*f.lhs)); break;
      case Op::Release: {
        // a R b == !(!a U !b)
        auto na = negated(eval(*f.lhs));
        auto nb = negated(eval(*f.rhs));
        v = negated(until(na, nb));
        break;
      }
      case Op::Always: {
        auto na = negated(eval(*f.lhs));
        v = negated(until(std::vector<char>(n, 1), na));
        break;
      }
    }
    return memo_.emplace(&f, std::move(v)).first->second;
  }

 private:
  std::size_t prefix_len_;
  std::vector<Letterset> positions_;
  std::unordered_map<const Formula*, std::vector<char>> memo_;

  std::size_t succ(std::size_t i) const { return i + 1 < positions_.size() ? i + 1 : prefix_len_; }

  static std::vector<char> negated(std::vector<char> v) {
    for (auto& x : v) x = !x;
    return v;
  }

  // Least fixpoint of U(i) = b(i) | (a(i) & U(succ i)).
  std::vector<char> until(const std::vector<char>& a, const std::vector<char>& b) const {
    const std::size_t n = positions_.size();
    std::vector<char> u(b);
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t k = n; k-- > 0;) {
        if (!u[k] && a[k] && u[succ(k)]) {
          u[k] = 1;
          changed = true;
        }
      }
    }
    return u;
  }
};

}  // namespace detail

/// Whether prefix·loop^ω satisfies `f`. The loop must be nonempty.
inline bool evaluate_lasso(const Formula& f, const Word& prefix, const Word& loop) {
  if (loop.empty()) throw ValidationError("evaluate_lasso: loop must be nonempty");
  detail::LassoEvaluator ev(prefix, loop);
  return ev.eval(f)[0];
}

inline bool evaluate_lasso(const FormulaPtr& f, const Word& prefix, const Word& loop) {
  return evaluate_lasso(*f, prefix, loop);
}

}  // namespace rhp::ltl
