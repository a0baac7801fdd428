#include "finact/stallings.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace finact {

Word word_mul(const Word& a, const Word& b) {
  Word out = a;
  for (int l : b) {
    if (!out.empty() && out.back() == -l)
      out.pop_back();
    else
      out.push_back(l);
  }
  return out;
}

Word word_inv(const Word& a) {
  Word out(a.rbegin(), a.rend());
  for (int& l : out) l = -l;
  return out;
}

int Stallings::enc(int letter, int) { return 2 * (std::abs(letter) - 1) + (letter < 0 ? 1 : 0); }
int Stallings::encne(int e) { return e ^ 1; }

bool word_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (size_t i = 0; i < a.size(); ++i) {
    int ka = Stallings::enc(a[i], 0), kb = Stallings::enc(b[i], 0);
    if (ka != kb) return ka < kb;
  }
  return false;
}

namespace {

struct Edge {
  int s, e, t;  // s --e--> t with e an encoded positive or negative letter
};

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

void Stallings::build(const std::vector<Word>& loops) {
  // raw graph: one path per loop, glued at the base
  std::vector<Edge> edges;
  int n = 1;
  for (const auto& w : loops) {
    if (w.empty()) continue;
    int cur = 0;
    for (size_t i = 0; i < w.size(); ++i) {
      int next = (i + 1 == w.size()) ? 0 : n++;
      int e = enc(w[i], rank_);
      if (w[i] > 0)
        edges.push_back({cur, e, next});
      else
        edges.push_back({next, encne(e), cur});
      cur = next;
    }
  }
  // fold: merge targets of equally-labeled edges until deterministic
  UnionFind uf(n);
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::pair<int, int>, int> seen;
    for (const auto& ed : edges) {
      int s = uf.find(ed.s), t = uf.find(ed.t);
      for (auto [a, e, b] : {std::tuple{s, ed.e, t}, std::tuple{t, encne(ed.e), s}}) {
        auto key = std::make_pair(a, e);
        auto it = seen.find(key);
        if (it == seen.end()) {
          seen.emplace(key, b);
        } else if (uf.find(it->second) != uf.find(b)) {
          uf.unite(it->second, b);
          changed = true;
        }
      }
    }
  }
  // canonical renumbering: BFS from base over encoded letters in order
  std::map<std::pair<int, int>, int> trans;
  for (const auto& ed : edges) {
    trans[{uf.find(ed.s), ed.e}] = uf.find(ed.t);
    trans[{uf.find(ed.t), encne(ed.e)}] = uf.find(ed.s);
  }
  std::map<int, int> id;
  std::deque<int> queue{uf.find(0)};
  id[uf.find(0)] = 0;
  std::vector<int> order{uf.find(0)};
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    for (int e = 0; e < 2 * rank_; ++e) {
      auto it = trans.find({s, e});
      if (it != trans.end() && !id.count(it->second)) {
        id[it->second] = static_cast<int>(order.size());
        order.push_back(it->second);
        queue.push_back(it->second);
      }
    }
  }
  delta_.assign(order.size(), std::vector<int>(2 * rank_, -1));
  for (size_t i = 0; i < order.size(); ++i)
    for (int e = 0; e < 2 * rank_; ++e) {
      auto it = trans.find({order[i], e});
      if (it != trans.end()) delta_[i][e] = id[it->second];
    }
}

Stallings::Stallings(int rank, const std::vector<Word>& generators) : rank_(rank) {
  for (const auto& w : generators)
    for (int l : w)
      if (l == 0 || std::abs(l) > rank) throw std::invalid_argument("letter out of range");
  std::vector<Word> reduced;
  for (const auto& w : generators) reduced.push_back(word_mul({}, w));
  build(reduced);
}

int Stallings::step(int state, int letter) const {
  int e = enc(letter, rank_);
  return delta_[state][e];
}

std::optional<int> Stallings::trace(int state, const Word& w) const {
  int cur = state;
  for (int l : w) {
    cur = step(cur, l);
    if (cur < 0) return std::nullopt;
  }
  return cur;
}

bool Stallings::is_complete() const {
  for (const auto& row : delta_)
    for (int t : row)
      if (t < 0) return false;
  return true;
}

std::optional<std::int64_t> Stallings::index() const {
  if (!is_complete()) return std::nullopt;
  return num_states();
}

std::vector<Word> Stallings::coset_reps() const {
  if (!is_complete()) throw std::invalid_argument("coset_reps: subgroup has infinite index");
  std::vector<Word> rep(num_states());
  std::vector<bool> seen(num_states(), false);
  std::deque<int> queue{0};
  seen[0] = true;
  std::vector<Word> out{Word{}};
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    for (int e = 0; e < 2 * rank_; ++e) {
      int t = delta_[s][e];
      if (t >= 0 && !seen[t]) {
        seen[t] = true;
        int letter = (e % 2 == 0 ? 1 : -1) * (e / 2 + 1);
        rep[t] = rep[s];
        rep[t].push_back(letter);
        out.push_back(rep[t]);
        queue.push_back(t);
      }
    }
  }
  return out;
}

std::vector<Word> Stallings::generator_words() const {
  // BFS spanning tree; each non-tree edge contributes one generator
  std::vector<Word> path(num_states());
  std::vector<bool> seen(num_states(), false);
  std::vector<std::vector<bool>> tree(num_states(), std::vector<bool>(2 * rank_, false));
  std::deque<int> queue{0};
  seen[0] = true;
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    for (int e = 0; e < 2 * rank_; ++e) {
      int t = delta_[s][e];
      if (t >= 0 && !seen[t]) {
        seen[t] = true;
        tree[s][e] = true;
        tree[t][encne(e)] = true;
        int letter = (e % 2 == 0 ? 1 : -1) * (e / 2 + 1);
        path[t] = path[s];
        path[t].push_back(letter);
        queue.push_back(t);
      }
    }
  }
  std::vector<Word> gens;
  for (int s = 0; s < num_states(); ++s)
    for (int e = 0; e < 2 * rank_; ++e) {
      if (e % 2 == 1) continue;  // walk positive orientation once
      int t = delta_[s][e];
      if (t < 0 || tree[s][e]) continue;
      int letter = e / 2 + 1;
      Word g = word_mul(word_mul(path[s], Word{letter}), word_inv(path[t]));
      if (!g.empty()) gens.push_back(std::move(g));
    }
  return gens;
}

Stallings Stallings::join(const std::vector<Word>& extra) const {
  std::vector<Word> gens = generator_words();
  gens.insert(gens.end(), extra.begin(), extra.end());
  return Stallings(rank_, gens);
}

Stallings Stallings::conjugate(const Word& w) const {
  std::vector<Word> gens;
  for (const auto& g : generator_words()) gens.push_back(word_mul(word_mul(w, g), word_inv(w)));
  return Stallings(rank_, gens);
}

Stallings Stallings::intersect(const Stallings& o) const {
  if (rank_ != o.rank_) throw std::invalid_argument("rank mismatch");
  // reachable product automaton; then read off a basis and rebuild, which
  // trims hanging trees and restores the canonical numbering
  std::map<std::pair<int, int>, int> id;
  std::vector<std::pair<int, int>> order{{0, 0}};
  id[{0, 0}] = 0;
  std::deque<int> queue{0};
  std::vector<std::vector<int>> pdelta;
  pdelta.emplace_back(2 * rank_, -1);
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    auto [s1, s2] = order[cur];
    for (int e = 0; e < 2 * rank_; ++e) {
      int t1 = delta_[s1][e], t2 = o.delta_[s2][e];
      if (t1 < 0 || t2 < 0) continue;
      auto key = std::make_pair(t1, t2);
      auto it = id.find(key);
      int tid;
      if (it == id.end()) {
        tid = static_cast<int>(order.size());
        id[key] = tid;
        order.push_back(key);
        pdelta.emplace_back(2 * rank_, -1);
        queue.push_back(tid);
      } else {
        tid = it->second;
      }
      pdelta[cur][e] = tid;
    }
  }
  Stallings prod;
  prod.rank_ = rank_;
  prod.delta_ = std::move(pdelta);
  return Stallings(rank_, prod.generator_words());
}

bool Stallings::equals(const Stallings& o) const {
  if (rank_ != o.rank_) return false;
  // canonical numbering makes equal subgroups structurally identical, as long
  // as both graphs are cores; all construction paths rebuild from loops
  return delta_ == o.delta_;
}

std::vector<Stallings::EdgeRec> Stallings::edges() const {
  std::vector<EdgeRec> out;
  for (int s = 0; s < num_states(); ++s)
    for (int e = 0; e < 2 * rank_; e += 2)
      if (delta_[s][e] >= 0) out.push_back({s, e / 2 + 1, delta_[s][e]});
  return out;
}

Stallings Stallings::from_transitions(int rank, const std::vector<std::vector<int>>& delta) {
  Stallings tmp;
  tmp.rank_ = rank;
  tmp.delta_ = delta;
  return Stallings(rank, tmp.generator_words());
}

FoldedTrace::FoldedTrace(int rank, int num_states, const std::vector<RawEdge>& raw, int start,
                         int accept, bool merge_start_accept)
    : rank_(rank) {
  std::vector<Edge> edges;
  for (const auto& e : raw) {
    int enc = Stallings::enc(e.letter, rank);
    if (e.letter > 0)
      edges.push_back({e.s, enc, e.t});
    else
      edges.push_back({e.t, enc ^ 1, e.s});
  }
  UnionFind uf(num_states);
  if (merge_start_accept) uf.unite(start, accept);
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::pair<int, int>, int> seen;
    for (const auto& ed : edges) {
      int s = uf.find(ed.s), t = uf.find(ed.t);
      for (auto [a, e, b] : {std::tuple{s, ed.e, t}, std::tuple{t, ed.e ^ 1, s}}) {
        auto key = std::make_pair(a, e);
        auto it = seen.find(key);
        if (it == seen.end()) {
          seen.emplace(key, b);
        } else if (uf.find(it->second) != uf.find(b)) {
          uf.unite(it->second, b);
          changed = true;
        }
      }
    }
  }
  std::map<std::pair<int, int>, int> trans;
  for (const auto& ed : edges) {
    trans[{uf.find(ed.s), ed.e}] = uf.find(ed.t);
    trans[{uf.find(ed.t), ed.e ^ 1}] = uf.find(ed.s);
  }
  std::map<int, int> id;
  auto get_id = [&](int root) {
    auto it = id.find(root);
    if (it != id.end()) return it->second;
    int nid = static_cast<int>(id.size());
    id[root] = nid;
    delta_.emplace_back(2 * rank_, -1);
    return nid;
  };
  for (const auto& [key, t] : trans) {
    int s = get_id(key.first);
    int tt = get_id(t);
    delta_[s][key.second] = tt;
  }
  start_ = get_id(uf.find(start));
  accept_ = get_id(uf.find(accept));
}

bool FoldedTrace::accepts(const Word& w) const {
  int cur = start_;
  for (int l : w) {
    cur = delta_[cur][Stallings::enc(l, rank_)];
    if (cur < 0) return false;
  }
  return cur == accept_;
}

}  // namespace finact

