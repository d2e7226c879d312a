#pragma once

// Letters are service names or silent markers ("~i"). A symbol is a set of
// letters, encoded as a bit mask over an ordered LetterTable.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rhp/error.hpp"

namespace rhp {

using Symbol = std::uint64_t;
inline constexpr std::size_t kMaxLetters = 64;

inline bool is_silent_marker(std::string_view name) {
  return !name.empty() && name.front() == '~';
}

inline std::string silent_marker(std::size_t agent) {
  return "~" + std::to_string(agent);
}

/// Ordered, duplicate-free list of letter names.
class LetterTable {
 public:
  LetterTable() = default;
  explicit LetterTable(std::vector<std::string> names) {
    for (auto& n : names) add(n);
  }

  std::size_t add(const std::string& name) {
    if (auto it = index_.find(name); it != index_.end()) return it->second;
    if (names_.size() >= kMaxLetters)
      throw ValidationError("too many letters (limit 64): " + name);
    index_.emplace(name, names_.size());
    names_.push_back(name);
    return names_.size() - 1;
  }

  std::optional<std::size_t> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t at(std::string_view name) const {
    auto i = find(name);
    if (!i) throw ValidationError("unknown letter '" + std::string(name) + "'");
    return *i;
  }

  const std::string& name(std::size_t i) const { return names_.at(i); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  Symbol all() const {
    return names_.size() == 64 ? ~Symbol{0} : (Symbol{1} << names_.size()) - 1;
  }

  Symbol silent_mask() const {
    Symbol m = 0;
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (is_silent_marker(names_[i])) m |= Symbol{1} << i;
    return m;
  }

  Symbol encode(const std::set<std::string>& letters) const {
    Symbol m = 0;
    for (const auto& l : letters) m |= Symbol{1} << at(l);
    return m;
  }

  std::set<std::string> decode(Symbol s) const {
    std::set<std::string> out;
    for (; s; s &= s - 1) out.insert(names_.at(std::countr_zero(s)));
    return out;
  }

  /// "{a,b}" with names in sorted order; "{}" for the empty set.
  std::string format(Symbol s) const {
    std::string out = "{";
    bool first = true;
    for (const auto& n : decode(s)) {
      if (!first) out += ',';
      out += n;
      first = false;
    }
    return out + "}";
  }

  bool operator==(const LetterTable& o) const { return names_ == o.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Canonical symbol order: lexicographic on the sorted tuple of letter names.
/// Requires a table whose bit order agrees with name order (see
/// `sorted_table`); otherwise the order is still total but follows bit order.
inline bool symbol_less(Symbol a, Symbol b) {
  while (a != b) {
    if (a == 0) return true;
    if (b == 0) return false;
    int la = std::countr_zero(a), lb = std::countr_zero(b);
    if (la != lb) return la < lb;
    a &= a - 1;
    b &= b - 1;
  }
  return false;
}

inline LetterTable sorted_table(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return LetterTable(std::move(names));
}

/// Maps symbols between two tables. Letters absent from the target are
/// dropped, which is exactly intersection with the target's letters.
class LetterProjection {
 public:
  LetterProjection() = default;
  LetterProjection(const LetterTable& from, const LetterTable& to) {
    for (std::size_t i = 0; i < from.size(); ++i)
      if (auto j = to.find(from.name(i))) pairs_.emplace_back(i, *j);
    for (auto [f, t] : pairs_) domain_ |= Symbol{1} << f;
  }

  Symbol operator()(Symbol s) const {
    Symbol out = 0;
    for (auto [f, t] : pairs_)
      if (s >> f & 1) out |= Symbol{1} << t;
    return out;
  }

  /// Letters of the source table that survive projection.
  Symbol domain() const { return domain_; }

  Symbol lift(Symbol s) const {
    Symbol out = 0;
    for (auto [f, t] : pairs_)
      if (s >> t & 1) out |= Symbol{1} << f;
    return out;
  }

 private:
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  Symbol domain_ = 0;
};

}  // namespace rhp
