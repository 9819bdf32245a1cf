#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_set>

namespace hitt {

/// Interned identifier. Two Names are equal iff they point at the same pooled string,
/// so comparison and hashing are pointer operations.
class Name {
public:
  Name() : str_(&empty()) {}
  explicit Name(std::string_view s) : str_(&intern(s)) {}

  const std::string& str() const { return *str_; }
  bool empty_name() const { return str_->empty(); }

  friend bool operator==(Name a, Name b) { return a.str_ == b.str_; }
  friend bool operator!=(Name a, Name b) { return a.str_ != b.str_; }
  friend std::ostream& operator<<(std::ostream& os, Name n) { return os << *n.str_; }

  std::size_t hash() const { return std::hash<const void*>{}(str_); }

private:
  static const std::string& empty() {
    static const std::string e;
    return e;
  }

  static const std::string& intern(std::string_view s) {
    if (s.empty()) return empty();
    static std::mutex mu;
    static std::unordered_set<std::string> pool;
    std::lock_guard lock(mu);
    return *pool.emplace(s).first;
  }

  const std::string* str_;
};

struct NameHash {
  std::size_t operator()(Name n) const { return n.hash(); }
};

} // namespace hitt
