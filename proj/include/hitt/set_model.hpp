#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "hitt/error.hpp"

namespace hitt::model {

inline constexpr std::uint64_t kMaxCarrier = 10'000'000;

/// Union-find with path halving; `find` is deterministic for a fixed union order.
class UnionFind {
public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent_[b] = a;
    else parent_[a] = b;
  }

private:
  std::vector<std::size_t> parent_;
};

/// One stage J_k of the finite model: its classes, the inclusion into J_{k+1}
/// and the multiplication A x J_k -> J_{k+1}. The last stage has neither map.
struct Stage {
  std::uint32_t size = 0;
  std::vector<std::uint32_t> include; // x -> i_k(x)
  std::vector<std::uint32_t> alpha;   // a * size + x -> alpha_k(a, x)
};

/// J_0 .. J_n over the set A = {0 .. m-1} pointed at 0.
struct JamesModel {
  std::uint32_t m = 0;
  std::uint32_t n = 0;
  std::vector<Stage> stages;

  std::uint32_t classes() const { return stages.back().size; }
};

/// Builds the stages by quotienting J_{k+1} + A x J_{k+1} with union-find.
inline JamesModel build_jn(std::uint32_t m, std::uint32_t n) {
  if (m == 0) throw Error(ErrorKind::BadDeclaration, "the pointed set needs at least one element");
  JamesModel jm;
  jm.m = m;
  jm.n = n;
  jm.stages.push_back(Stage{1, {}, {}});
  if (n == 0) return jm;
  jm.stages.push_back(Stage{m, {}, {}});
  jm.stages[0].include = {0};
  jm.stages[0].alpha.resize(m);
  std::iota(jm.stages[0].alpha.begin(), jm.stages[0].alpha.end(), 0u);
  for (std::uint32_t k = 0; k + 2 <= n; ++k) {
    const std::uint64_t prev = jm.stages[k + 1].size;
    const std::uint64_t carrier = prev * (1 + std::uint64_t{m});
    if (carrier > kMaxCarrier)
      throw Error(ErrorKind::FuelExhausted, "stage " + std::to_string(k + 2) + " needs a carrier of " +
                                                std::to_string(carrier) + " elements (limit " +
                                                std::to_string(kMaxCarrier) + ")");
    auto inr = [&](std::uint64_t y) { return static_cast<std::size_t>(y); };
    auto inl = [&](std::uint64_t a, std::uint64_t y) { return static_cast<std::size_t>(prev + a * prev + y); };
    UnionFind uf(static_cast<std::size_t>(carrier));
    const Stage& low = jm.stages[k];
    for (std::uint32_t a = 0; a < m; ++a)
      for (std::uint32_t x = 0; x < low.size; ++x) uf.unite(inl(a, low.include[x]), inr(low.alpha[a * low.size + x]));
    for (std::uint64_t y = 0; y < prev; ++y) uf.unite(inl(0, y), inr(y));

    std::vector<std::uint32_t> label(static_cast<std::size_t>(carrier), UINT32_MAX);
    std::uint32_t next = 0;
    for (std::size_t e = 0; e < carrier; ++e) {
      std::size_t r = uf.find(e);
      if (label[r] == UINT32_MAX) label[r] = next++;
    }
    Stage& mid = jm.stages[k + 1];
    mid.include.resize(prev);
    mid.alpha.resize(prev * m);
    for (std::uint64_t y = 0; y < prev; ++y) mid.include[y] = label[uf.find(inr(y))];
    for (std::uint32_t a = 0; a < m; ++a)
      for (std::uint64_t y = 0; y < prev; ++y) mid.alpha[a * prev + y] = label[uf.find(inl(a, y))];
    jm.stages.push_back(Stage{next, {}, {}});
  }
  return jm;
}

using Word = std::vector<std::uint32_t>;

/// Words of length <= n over the letters 1 .. m-1, in lexicographic order.
inline std::vector<Word> enumerate_words(std::uint32_t m, std::uint32_t n) {
  std::vector<Word> out;
  Word cur;
  auto rec = [&](auto& self) -> void {
    out.push_back(cur);
    if (cur.size() == n) return;
    for (std::uint32_t a = 1; a < m; ++a) {
      cur.push_back(a);
      self(self);
      cur.pop_back();
    }
  };
  rec(rec);
  return out;
}

/// Class of a word in J_k: multiply the letters onto the base point from the
/// right, then include up to stage k.
inline std::uint32_t word_class(const JamesModel& jm, const Word& w, std::uint32_t k) {
  std::uint32_t x = 0;
  std::uint32_t level = 0;
  for (auto it = w.rbegin(); it != w.rend(); ++it, ++level) {
    const Stage& s = jm.stages[level];
    x = s.alpha[*it * s.size + x];
  }
  for (; level < k; ++level) x = jm.stages[level].include[x];
  return x;
}

struct ModelReport {
  std::uint32_t m = 0;
  std::uint32_t n = 0;
  std::uint32_t classes = 0;
  std::size_t words = 0;
  bool bijection = false;  // words of length <= n onto the classes of J_n
  bool compatible = false; // the word map commutes with every inclusion
};

inline ModelReport verify_model(const JamesModel& jm) {
  ModelReport r;
  r.m = jm.m;
  r.n = jm.n;
  r.classes = jm.classes();
  auto words = enumerate_words(jm.m, jm.n);
  r.words = words.size();
  std::vector<bool> hit(r.classes, false);
  bool injective = true;
  for (const auto& w : words) {
    auto c = word_class(jm, w, jm.n);
    if (hit[c]) injective = false;
    hit[c] = true;
  }
  r.bijection = injective && words.size() == r.classes;
  r.compatible = true;
  for (std::uint32_t k = 0; k < jm.n && r.compatible; ++k)
    for (const auto& w : words)
      if (w.size() <= k && jm.stages[k].include[word_class(jm, w, k)] != word_class(jm, w, k + 1)) {
        r.compatible = false;
        break;
      }
  return r;
}

inline nlohmann::json to_json(const ModelReport& r) {
  return {{"m", r.m}, {"n", r.n}, {"classes", r.classes}, {"words", r.words}, {"bijection", r.bijection}};
}

} // namespace hitt::model
