#include "finact/group.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <numeric>
#include <sstream>

namespace finact {

// ---------------------------------------------------------------- permutations

Perm perm_identity(int n) {
  Perm p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

Perm perm_compose(const Perm& a, const Perm& b) {
  Perm r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[b[i]];
  return r;
}

Perm perm_inverse(const Perm& a) {
  Perm r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[a[i]] = static_cast<int>(i);
  return r;
}

std::vector<int> perm_order_key(const Perm& p) {
  std::vector<int> key;
  int moved = 0;
  for (size_t i = 0; i < p.size(); ++i)
    if (p[i] != static_cast<int>(i)) ++moved;
  key.push_back(moved);
  std::vector<bool> seen(p.size(), false);
  for (size_t i = 0; i < p.size(); ++i) {
    if (seen[i] || p[i] == static_cast<int>(i)) continue;
    std::vector<int> cycle;
    int j = static_cast<int>(i);
    while (!seen[j]) {
      seen[j] = true;
      cycle.push_back(j);
      j = p[j];
    }
    key.push_back(static_cast<int>(cycle.size()));
    key.insert(key.end(), cycle.begin(), cycle.end());
  }
  return key;
}

std::string perm_cycle_string(const Perm& p) {
  std::ostringstream os;
  std::vector<bool> seen(p.size(), false);
  bool any = false;
  for (size_t i = 0; i < p.size(); ++i) {
    if (seen[i] || p[i] == static_cast<int>(i)) continue;
    any = true;
    os << '(';
    int j = static_cast<int>(i);
    bool first = true;
    while (!seen[j]) {
      seen[j] = true;
      if (!first) os << ' ';
      os << (j + 1);
      first = false;
      j = p[j];
    }
    os << ')';
  }
  return any ? os.str() : "e";
}

std::vector<Perm> all_perms_ordered(int n) {
  std::vector<Perm> out;
  Perm p = perm_identity(n);
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  std::sort(out.begin(), out.end(),
            [](const Perm& a, const Perm& b) { return perm_order_key(a) < perm_order_key(b); });
  return out;
}

// ---------------------------------------------------------------------- Group

namespace {

std::vector<std::string> default_labels(int k) {
  std::vector<std::string> out;
  for (int i = 0; i < k; ++i) out.push_back(std::string(1, static_cast<char>('a' + i)));
  return out;
}

}  // namespace

GroupPtr Group::free_abelian(int d) {
  auto g = std::make_shared<Group>();
  g->backend = Backend::FreeAbelian;
  g->rank = d;
  g->labels = default_labels(d);
  return g;
}

GroupPtr Group::free(int k) {
  auto g = std::make_shared<Group>();
  g->backend = Backend::Free;
  g->rank = k;
  g->labels = default_labels(k);
  return g;
}

GroupPtr Group::finite(FiniteTable t, std::vector<int> gens) {
  auto g = std::make_shared<Group>();
  g->backend = Backend::Finite;
  g->table = std::move(t);
  g->finite_gens = std::move(gens);
  for (int i : g->finite_gens) g->labels.push_back(g->table.names[i]);
  return g;
}

GroupPtr Group::symmetric(int n) {
  auto perms = all_perms_ordered(n);
  std::map<Perm, int> idx;
  for (size_t i = 0; i < perms.size(); ++i) idx[perms[i]] = static_cast<int>(i);
  FiniteTable t;
  t.n = static_cast<int>(perms.size());
  t.identity = idx.at(perm_identity(n));
  t.mul.resize(t.n * t.n);
  t.inv.resize(t.n);
  for (int a = 0; a < t.n; ++a) {
    t.inv[a] = idx.at(perm_inverse(perms[a]));
    for (int b = 0; b < t.n; ++b) t.mul[a * t.n + b] = idx.at(perm_compose(perms[a], perms[b]));
    t.names.push_back(perm_cycle_string(perms[a]));
  }
  std::vector<int> gens;
  if (n >= 2) {
    Perm tr = perm_identity(n);
    std::swap(tr[0], tr[1]);
    gens.push_back(idx.at(tr));
    if (n >= 3) {
      Perm cyc(n);
      for (int i = 0; i < n; ++i) cyc[i] = (i + 1) % n;
      gens.push_back(idx.at(cyc));
    }
  }
  return finite(std::move(t), std::move(gens));
}

GroupPtr Group::cyclic(std::int64_t c) {
  if (c <= 0) throw UsageError("cyclic: order must be positive");
  FiniteTable t;
  t.n = static_cast<int>(c);
  t.identity = 0;
  t.mul.resize(t.n * t.n);
  t.inv.resize(t.n);
  for (int a = 0; a < t.n; ++a) {
    t.inv[a] = static_cast<int>((c - a) % c);
    for (int b = 0; b < t.n; ++b) t.mul[a * t.n + b] = static_cast<int>((a + b) % c);
    t.names.push_back(std::to_string(a));
  }
  std::vector<int> gens;
  if (c > 1) gens.push_back(1);
  return finite(std::move(t), std::move(gens));
}

int Group::num_generators() const {
  return backend == Backend::Finite ? static_cast<int>(finite_gens.size()) : rank;
}

std::string Group::describe() const {
  switch (backend) {
    case Backend::FreeAbelian: return "Z^" + std::to_string(rank);
    case Backend::Free: return "F_" + std::to_string(rank);
    case Backend::Finite: return "finite(" + std::to_string(table.n) + ")";
  }
  return "?";
}

bool same_group(const GroupPtr& a, const GroupPtr& b) {
  if (a == b) return true;
  if (!a || !b || a->backend != b->backend) return false;
  if (a->backend == Backend::Finite) return false;  // distinct tables are distinct groups
  return a->rank == b->rank;
}

// ----------------------------------------------------------------------- Elem

bool Elem::is_identity() const {
  switch (group->backend) {
    case Backend::FreeAbelian:
      return std::all_of(vec.begin(), vec.end(), [](std::int64_t x) { return x == 0; });
    case Backend::Free: return word.empty();
    case Backend::Finite: return idx == group->table.identity;
  }
  return false;
}

std::string Elem::str() const {
  switch (group->backend) {
    case Backend::FreeAbelian: {
      std::ostringstream os;
      os << '(';
      for (size_t i = 0; i < vec.size(); ++i) {
        if (i) os << ',';
        os << vec[i];
      }
      os << ')';
      return os.str();
    }
    case Backend::Free: {
      if (word.empty()) return "e";
      std::string s;
      for (int l : word) {
        char c = group->labels[std::abs(l) - 1][0];
        s.push_back(l > 0 ? c : static_cast<char>(std::toupper(c)));
      }
      return s;
    }
    case Backend::Finite: return group->table.names[idx];
  }
  return "?";
}

bool Elem::operator==(const Elem& o) const {
  return vec == o.vec && word == o.word && idx == o.idx;
}

bool Elem::operator<(const Elem& o) const {
  switch (group->backend) {
    case Backend::FreeAbelian: {
      std::int64_t n1 = 0, n2 = 0;
      for (auto x : vec) n1 += std::abs(x);
      for (auto x : o.vec) n2 += std::abs(x);
      if (n1 != n2) return n1 < n2;
      for (size_t i = 0; i < vec.size(); ++i) {
        auto k1 = std::make_pair(std::abs(vec[i]), vec[i] < 0);
        auto k2 = std::make_pair(std::abs(o.vec[i]), o.vec[i] < 0);
        if (k1 != k2) return k1 < k2;
      }
      return false;
    }
    case Backend::Free: return word_less(word, o.word);
    case Backend::Finite: return idx < o.idx;
  }
  return false;
}

Elem identity_elem(const GroupPtr& g) {
  Elem e;
  e.group = g;
  switch (g->backend) {
    case Backend::FreeAbelian: e.vec.assign(g->rank, 0); break;
    case Backend::Free: break;
    case Backend::Finite: e.idx = g->table.identity; break;
  }
  return e;
}

Elem mul(const Elem& a, const Elem& b) {
  if (!same_group(a.group, b.group)) throw UsageError("mul: mismatched group handles");
  Elem r = a;
  switch (a.group->backend) {
    case Backend::FreeAbelian:
      for (size_t i = 0; i < r.vec.size(); ++i) r.vec[i] += b.vec[i];
      break;
    case Backend::Free: r.word = word_mul(a.word, b.word); break;
    case Backend::Finite: r.idx = a.group->table.times(a.idx, b.idx); break;
  }
  return r;
}

Elem inverse(const Elem& a) {
  Elem r = a;
  switch (a.group->backend) {
    case Backend::FreeAbelian:
      for (auto& x : r.vec) x = -x;
      break;
    case Backend::Free: r.word = word_inv(a.word); break;
    case Backend::Finite: r.idx = a.group->table.inverse(a.idx); break;
  }
  return r;
}

Elem elem_from_vec(const GroupPtr& g, Vec v) {
  if (g->backend != Backend::FreeAbelian || static_cast<int>(v.size()) != g->rank)
    throw UsageError("elem_from_vec: bad payload");
  Elem e;
  e.group = g;
  e.vec = std::move(v);
  return e;
}

Elem elem_from_word(const GroupPtr& g, Word w) {
  if (g->backend != Backend::Free) throw UsageError("elem_from_word: not a free group");
  Elem e;
  e.group = g;
  e.word = word_mul({}, std::move(w));
  return e;
}

Elem elem_from_index(const GroupPtr& g, int idx) {
  if (g->backend != Backend::Finite || idx < 0 || idx >= g->table.n)
    throw UsageError("elem_from_index: bad payload");
  Elem e;
  e.group = g;
  e.idx = idx;
  return e;
}

Elem parse_elem(const GroupPtr& g, const std::string& s) {
  switch (g->backend) {
    case Backend::FreeAbelian: {
      std::string body = s;
      body.erase(std::remove_if(body.begin(), body.end(),
                                [](char c) { return c == '(' || c == ')' || c == ' ' || c == '['
                                                 || c == ']'; }),
                 body.end());
      Vec v;
      std::stringstream ss(body);
      std::string tok;
      while (std::getline(ss, tok, ',')) v.push_back(std::stoll(tok));
      return elem_from_vec(g, std::move(v));
    }
    case Backend::Free: {
      Word w;
      for (char c : s) {
        if (c == ' ' || c == 'e') continue;
        bool inv = std::isupper(static_cast<unsigned char>(c));
        int letter = std::tolower(static_cast<unsigned char>(c)) - 'a' + 1;
        if (letter < 1 || letter > g->rank) throw UsageError("parse_elem: unknown letter");
        w.push_back(inv ? -letter : letter);
      }
      return elem_from_word(g, std::move(w));
    }
    case Backend::Finite: {
      for (int i = 0; i < g->table.n; ++i)
        if (g->table.names[i] == s) return elem_from_index(g, i);
      return elem_from_index(g, std::stoi(s));
    }
  }
  throw UsageError("parse_elem: bad backend");
}

std::vector<Elem> word_ball(const GroupPtr& g, int radius) {
  std::vector<Elem> out;
  switch (g->backend) {
    case Backend::FreeAbelian: {
      Vec cur(g->rank, -radius);
      while (true) {
        std::int64_t l1 = 0;
        for (auto x : cur) l1 += std::abs(x);
        if (l1 <= radius) out.push_back(elem_from_vec(g, cur));
        int c = g->rank - 1;
        while (c >= 0 && ++cur[c] > radius) cur[c--] = -radius;
        if (c < 0) break;
      }
      std::sort(out.begin(), out.end());
      break;
    }
    case Backend::Free: {
      std::vector<Word> layer{Word{}};
      out.push_back(identity_elem(g));
      for (int len = 1; len <= radius; ++len) {
        std::vector<Word> next;
        for (const auto& w : layer)
          for (int e = 0; e < 2 * g->rank; ++e) {
            int letter = (e % 2 == 0 ? 1 : -1) * (e / 2 + 1);
            if (!w.empty() && w.back() == -letter) continue;
            Word nw = w;
            nw.push_back(letter);
            out.push_back(elem_from_word(g, nw));
            next.push_back(std::move(nw));
          }
        layer = std::move(next);
      }
      break;
    }
    case Backend::Finite: {
      std::vector<bool> seen(g->table.n, false);
      std::deque<std::pair<int, int>> queue{{g->table.identity, 0}};
      seen[g->table.identity] = true;
      while (!queue.empty()) {
        auto [cur, d] = queue.front();
        queue.pop_front();
        out.push_back(elem_from_index(g, cur));
        if (d == radius) continue;
        for (int gi : g->finite_gens)
          for (int nxt : {g->table.times(cur, gi), g->table.times(cur, g->table.inverse(gi))})
            if (!seen[nxt]) {
              seen[nxt] = true;
              queue.emplace_back(nxt, d + 1);
            }
      }
      break;
    }
  }
  return out;
}

// ------------------------------------------------------------------- Subgroup

Subgroup Subgroup::from_lattice(const GroupPtr& g, const Mat& gens) {
  if (g->backend != Backend::FreeAbelian) throw UsageError("from_lattice: not free abelian");
  Subgroup s;
  s.group = g;
  s.lat_ = Lattice(g->rank, gens);
  return s;
}

Subgroup Subgroup::from_words(const GroupPtr& g, const std::vector<Word>& gens) {
  if (g->backend != Backend::Free) throw UsageError("from_words: not a free group");
  Subgroup s;
  s.group = g;
  s.aut_ = Stallings(g->rank, gens);
  return s;
}

Subgroup Subgroup::from_generators(const GroupPtr& g, const std::vector<Elem>& gens) {
  switch (g->backend) {
    case Backend::FreeAbelian: {
      Mat m;
      for (const auto& e : gens) m.push_back(e.vec);
      return from_lattice(g, m);
    }
    case Backend::Free: {
      std::vector<Word> ws;
      for (const auto& e : gens) ws.push_back(e.word);
      return from_words(g, ws);
    }
    case Backend::Finite: {
      Subgroup s;
      s.group = g;
      std::vector<int> gi;
      for (const auto& e : gens) gi.push_back(e.idx);
      s.members_ = subset_closure(g->table, gi);
      return s;
    }
  }
  throw UsageError("from_generators: bad backend");
}

Subgroup Subgroup::trivial(const GroupPtr& g) { return from_generators(g, {}); }

Subgroup Subgroup::whole(const GroupPtr& g) {
  std::vector<Elem> gens;
  switch (g->backend) {
    case Backend::FreeAbelian:
      for (int i = 0; i < g->rank; ++i) {
        Vec v(g->rank, 0);
        v[i] = 1;
        gens.push_back(elem_from_vec(g, v));
      }
      break;
    case Backend::Free:
      for (int i = 1; i <= g->rank; ++i) gens.push_back(elem_from_word(g, {i}));
      break;
    case Backend::Finite: {
      Subgroup s;
      s.group = g;
      s.members_.assign(g->table.n, 1);
      return s;
    }
  }
  return from_generators(g, gens);
}

bool Subgroup::contains(const Elem& e) const {
  if (!same_group(group, e.group)) throw UsageError("contains: mismatched group handles");
  switch (group->backend) {
    case Backend::FreeAbelian: return lat_.contains(e.vec);
    case Backend::Free: return aut_.accepts(e.word);
    case Backend::Finite: return members_[e.idx] != 0;
  }
  return false;
}

std::optional<std::int64_t> Subgroup::index() const {
  switch (group->backend) {
    case Backend::FreeAbelian: return lat_.index();
    case Backend::Free: return aut_.index();
    case Backend::Finite: {
      std::int64_t c = std::count(members_.begin(), members_.end(), 1);
      return group->table.n / c;
    }
  }
  return std::nullopt;
}

bool Subgroup::is_trivial() const {
  switch (group->backend) {
    case Backend::FreeAbelian: return lat_.rank() == 0;
    case Backend::Free: return aut_.generator_words().empty();
    case Backend::Finite: return std::count(members_.begin(), members_.end(), 1) == 1;
  }
  return false;
}

bool Subgroup::is_whole_group() const { return index() == std::optional<std::int64_t>(1); }

bool Subgroup::equals(const Subgroup& o) const {
  if (!same_group(group, o.group)) return false;
  switch (group->backend) {
    case Backend::FreeAbelian: return lat_ == o.lat_;
    case Backend::Free: return aut_.equals(o.aut_);
    case Backend::Finite: return members_ == o.members_;
  }
  return false;
}

bool Subgroup::contains_subgroup(const Subgroup& o) const {
  for (const auto& g : o.generators())
    if (!contains(g)) return false;
  return true;
}

bool Subgroup::is_normal() const {
  switch (group->backend) {
    case Backend::FreeAbelian: return true;
    case Backend::Finite: {
      for (int gi : group->finite_gens) {
        int gi_inv = group->table.inverse(gi);
        for (int h = 0; h < group->table.n; ++h)
          if (members_[h] && !members_[group->table.times(group->table.times(gi, h), gi_inv)])
            return false;
      }
      return true;
    }
    case Backend::Free: {
      if (is_trivial() || is_whole_group()) return true;
      if (!aut_.is_complete())
        throw UnsupportedError("is_normal: infinite-index free subgroup");
      auto gens = aut_.generator_words();
      for (const auto& rep : aut_.coset_reps())
        for (const auto& h : gens)
          if (!aut_.accepts(word_mul(word_mul(rep, h), word_inv(rep)))) return false;
      return true;
    }
  }
  return false;
}

Subgroup Subgroup::join(const Subgroup& o) const {
  if (!same_group(group, o.group)) throw UsageError("join: mismatched group handles");
  switch (group->backend) {
    case Backend::FreeAbelian: {
      Subgroup s;
      s.group = group;
      s.lat_ = lat_.sum(o.lat_);
      return s;
    }
    case Backend::Free: {
      Subgroup s;
      s.group = group;
      s.aut_ = aut_.join(o.aut_.generator_words());
      return s;
    }
    case Backend::Finite: {
      std::vector<int> gens;
      for (int i = 0; i < group->table.n; ++i)
        if (members_[i] || o.members_[i]) gens.push_back(i);
      Subgroup s;
      s.group = group;
      s.members_ = subset_closure(group->table, gens);
      return s;
    }
  }
  throw UsageError("join: bad backend");
}

Subgroup Subgroup::intersect(const Subgroup& o) const {
  if (!same_group(group, o.group)) throw UsageError("intersect: mismatched group handles");
  Subgroup s;
  s.group = group;
  switch (group->backend) {
    case Backend::FreeAbelian: s.lat_ = lat_.intersect(o.lat_); break;
    case Backend::Free: s.aut_ = aut_.intersect(o.aut_); break;
    case Backend::Finite: {
      s.members_.resize(group->table.n);
      for (int i = 0; i < group->table.n; ++i) s.members_[i] = members_[i] && o.members_[i];
      break;
    }
  }
  return s;
}

Subgroup Subgroup::conjugate(const Elem& x) const {
  if (!same_group(group, x.group)) throw UsageError("conjugate: mismatched group handles");
  switch (group->backend) {
    case Backend::FreeAbelian: return *this;
    case Backend::Free: {
      Subgroup s;
      s.group = group;
      s.aut_ = aut_.conjugate(x.word);
      return s;
    }
    case Backend::Finite: {
      Subgroup s;
      s.group = group;
      s.members_.assign(group->table.n, 0);
      int xi = x.idx, xinv = group->table.inverse(x.idx);
      for (int h = 0; h < group->table.n; ++h)
        if (members_[h]) s.members_[group->table.times(group->table.times(xi, h), xinv)] = 1;
      return s;
    }
  }
  throw UsageError("conjugate: bad backend");
}

std::vector<Elem> Subgroup::generators() const {
  std::vector<Elem> out;
  switch (group->backend) {
    case Backend::FreeAbelian:
      for (const auto& v : lat_.generators()) out.push_back(elem_from_vec(group, v));
      break;
    case Backend::Free:
      for (const auto& w : aut_.generator_words()) out.push_back(elem_from_word(group, w));
      break;
    case Backend::Finite:
      for (int i = 0; i < group->table.n; ++i)
        if (members_[i]) out.push_back(elem_from_index(group, i));
      break;
  }
  return out;
}

std::vector<Elem> Subgroup::ball(int radius) const {
  std::vector<Elem> out;
  switch (group->backend) {
    case Backend::FreeAbelian:
      for (const auto& e : word_ball(group, radius))
        if (lat_.contains(e.vec)) out.push_back(e);
      break;
    case Backend::Free: {
      // depth-first enumeration of reduced loops at the base
      struct Frame {
        int state;
        Word w;
      };
      std::vector<Frame> stack{{0, {}}};
      while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.state == 0) out.push_back(elem_from_word(group, f.w));
        if (static_cast<int>(f.w.size()) == radius) continue;
        for (int e = 2 * group->rank - 1; e >= 0; --e) {
          int letter = (e % 2 == 0 ? 1 : -1) * (e / 2 + 1);
          if (!f.w.empty() && f.w.back() == -letter) continue;
          int t = aut_.step(f.state, letter);
          if (t < 0) continue;
          Word nw = f.w;
          nw.push_back(letter);
          stack.push_back({t, std::move(nw)});
        }
      }
      std::sort(out.begin(), out.end());
      break;
    }
    case Backend::Finite:
      return generators();
  }
  return out;
}

std::string Subgroup::str() const {
  std::ostringstream os;
  os << "<";
  auto gens = generators();
  for (size_t i = 0; i < gens.size(); ++i) {
    if (i) os << ", ";
    os << gens[i].str();
  }
  os << ">";
  return os.str();
}

// --------------------------------------------------------------- finite sets

std::vector<char> subset_product(const FiniteTable& t, const std::vector<char>& a,
                                 const std::vector<char>& b) {
  std::vector<char> out(t.n, 0);
  for (int x = 0; x < t.n; ++x) {
    if (!a[x]) continue;
    for (int y = 0; y < t.n; ++y)
      if (b[y]) out[t.times(x, y)] = 1;
  }
  return out;
}

std::vector<char> subset_closure(const FiniteTable& t, const std::vector<int>& gens) {
  std::vector<char> in(t.n, 0);
  std::deque<int> queue{t.identity};
  in[t.identity] = 1;
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    for (int g : gens)
      for (int nxt : {t.times(cur, g), t.times(cur, t.inverse(g))})
        if (!in[nxt]) {
          in[nxt] = 1;
          queue.push_back(nxt);
        }
  }
  return in;
}

// ------------------------------------------------------------ FiniteQuotient

FiniteQuotient FiniteQuotient::from_lattice(const GroupPtr& g, const Lattice& L) {
  if (g->backend != Backend::FreeAbelian) throw UsageError("from_lattice: not free abelian");
  auto idx = L.index();
  if (!idx) throw UsageError("from_lattice: infinite index lattice");
  FiniteQuotient q;
  q.source = g;
  q.kernel_lat = L;
  q.kernel_index = *idx;
  auto res = L.residues();
  for (size_t i = 0; i < res.size(); ++i) q.residue_index[res[i]] = static_cast<int>(i);
  FiniteTable t;
  t.n = static_cast<int>(res.size());
  t.identity = 0;
  t.mul.resize(t.n * t.n);
  t.inv.resize(t.n);
  for (int a = 0; a < t.n; ++a) {
    Vec neg(res[a].size());
    for (size_t i = 0; i < neg.size(); ++i) neg[i] = -res[a][i];
    t.inv[a] = q.residue_index.at(L.reduce(neg));
    for (int b = 0; b < t.n; ++b) {
      Vec sum(res[a].size());
      for (size_t i = 0; i < sum.size(); ++i) sum[i] = res[a][i] + res[b][i];
      t.mul[a * t.n + b] = q.residue_index.at(L.reduce(sum));
    }
    std::ostringstream os;
    os << '(';
    for (size_t i = 0; i < res[a].size(); ++i) {
      if (i) os << ',';
      os << res[a][i];
    }
    os << ')';
    t.names.push_back(os.str());
  }
  std::vector<int> gens;
  for (int i = 0; i < g->rank; ++i) {
    Vec e(g->rank, 0);
    e[i] = 1;
    int img = q.residue_index.at(L.reduce(e));
    q.images.push_back(img);
    gens.push_back(img);
  }
  q.target = Group::finite(std::move(t), std::move(gens));
  return q;
}

FiniteQuotient FiniteQuotient::from_perms(const GroupPtr& g, const std::vector<Perm>& images,
                                          int degree) {
  if (g->backend != Backend::Free) throw UsageError("from_perms: not a free group");
  if (static_cast<int>(images.size()) != g->rank) throw UsageError("from_perms: image count");
  // closure of the images inside S_degree
  std::map<Perm, int> seen;
  std::vector<Perm> elems{perm_identity(degree)};
  seen[elems[0]] = 0;
  std::deque<int> queue{0};
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    for (const auto& im : images)
      for (const Perm& nxt :
           {perm_compose(elems[cur], im), perm_compose(elems[cur], perm_inverse(im))}) {
        if (!seen.count(nxt)) {
          seen[nxt] = static_cast<int>(elems.size());
          elems.push_back(nxt);
          queue.push_back(static_cast<int>(elems.size()) - 1);
        }
      }
  }
  std::sort(elems.begin(), elems.end(),
            [](const Perm& a, const Perm& b) { return perm_order_key(a) < perm_order_key(b); });
  std::map<Perm, int> idx;
  for (size_t i = 0; i < elems.size(); ++i) idx[elems[i]] = static_cast<int>(i);
  FiniteTable t;
  t.n = static_cast<int>(elems.size());
  t.identity = idx.at(perm_identity(degree));
  t.mul.resize(t.n * t.n);
  t.inv.resize(t.n);
  for (int a = 0; a < t.n; ++a) {
    t.inv[a] = idx.at(perm_inverse(elems[a]));
    for (int b = 0; b < t.n; ++b) t.mul[a * t.n + b] = idx.at(perm_compose(elems[a], elems[b]));
    t.names.push_back(perm_cycle_string(elems[a]));
  }
  FiniteQuotient q;
  q.source = g;
  q.kernel_index = t.n;
  std::vector<int> gens;
  for (const auto& im : images) {
    q.images.push_back(idx.at(im));
    gens.push_back(idx.at(im));
  }
  q.target = Group::finite(std::move(t), std::move(gens));
  return q;
}

int FiniteQuotient::apply(const Elem& g) const {
  if (!same_group(g.group, source)) throw UsageError("apply: mismatched group handles");
  const auto& t = target->table;
  switch (source->backend) {
    case Backend::FreeAbelian: return residue_index.at(kernel_lat.reduce(g.vec));
    case Backend::Free: {
      int acc = t.identity;
      for (int l : g.word) {
        int im = images[std::abs(l) - 1];
        acc = t.times(acc, l > 0 ? im : t.inverse(im));
      }
      return acc;
    }
    case Backend::Finite: throw UnsupportedError("apply: finite source quotients unsupported");
  }
  throw UsageError("apply: bad backend");
}

std::vector<char> FiniteQuotient::image_of(const Subgroup& h) const {
  std::vector<int> gens;
  for (const auto& e : h.generators()) gens.push_back(apply(e));
  return subset_closure(target->table, gens);
}

Subgroup FiniteQuotient::kernel() const {
  if (source->backend == Backend::FreeAbelian)
    return Subgroup::from_lattice(source, kernel_lat.generators());
  std::vector<char> only_id(target->table.n, 0);
  only_id[target->table.identity] = 1;
  return preimage(only_id);
}

Subgroup FiniteQuotient::preimage(const std::vector<char>& subset) const {
  switch (source->backend) {
    case Backend::FreeAbelian: {
      Mat gens = kernel_lat.generators();
      for (const auto& [res, i] : residue_index)
        if (subset[i]) gens.push_back(res);
      return Subgroup::from_lattice(source, gens);
    }
    case Backend::Free: {
      // coset graph of phi^-1(S): states are right cosets S*q in the target
      const auto& t = target->table;
      auto coset_of = [&](int q) {
        // minimal element of S*q is the canonical coset id
        int best = -1;
        for (int s = 0; s < t.n; ++s)
          if (subset[s]) {
            int x = t.times(s, q);
            if (best < 0 || x < best) best = x;
          }
        return best;
      };
      std::map<int, int> id;
      std::vector<int> rep{coset_of(t.identity)};
      id[rep[0]] = 0;
      std::deque<int> queue{0};
      std::vector<std::vector<int>> delta;
      delta.emplace_back(2 * source->rank, -1);
      while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        for (int e = 0; e < 2 * source->rank; ++e) {
          int im = images[e / 2];
          int q2 = t.times(rep[cur], e % 2 == 0 ? im : t.inverse(im));
          int c2 = coset_of(q2);
          auto it = id.find(c2);
          int tid;
          if (it == id.end()) {
            tid = static_cast<int>(rep.size());
            id[c2] = tid;
            rep.push_back(c2);
            delta.emplace_back(2 * source->rank, -1);
            queue.push_back(tid);
          } else {
            tid = it->second;
          }
          delta[cur][e] = tid;
        }
      }
      Subgroup s;
      s.group = source;
      Stallings graph = Stallings::from_transitions(source->rank, delta);
      s = Subgroup::from_words(source, graph.generator_words());
      return s;
    }
    case Backend::Finite: throw UnsupportedError("preimage: finite source quotients unsupported");
  }
  throw UsageError("preimage: bad backend");
}

std::string FiniteQuotient::describe() const {
  std::ostringstream os;
  os << source->describe() << " -> " << target->describe() << " [";
  for (size_t i = 0; i < images.size(); ++i) {
    if (i) os << ", ";
    os << source->labels[i] << "->" << target->table.names[images[i]];
  }
  os << "], kernel index " << kernel_index;
  return os.str();
}

// ------------------------------------------------------------- membership ops

bool subgroup_membership(const Subgroup& h, const Elem& g) { return h.contains(g); }

namespace {

bool bounded_product_search(const Elem& g, const std::vector<Subgroup>& factors, size_t pos,
                            int bound) {
  if (pos + 1 == factors.size()) return factors[pos].contains(g);
  for (const auto& h : factors[pos].ball(bound)) {
    if (bounded_product_search(mul(inverse(h), g), factors, pos + 1, bound)) return true;
  }
  return false;
}

}  // namespace

TriResult product_membership(const Elem& g, const std::vector<Subgroup>& factors,
                             const FiniteQuotient* modulo, int search_bound) {
  if (factors.empty()) throw UsageError("product_membership: no factors");
  for (const auto& f : factors)
    if (!same_group(f.group, g.group)) throw UsageError("product_membership: mismatched handles");
  if (modulo) {
    if (!same_group(modulo->source, g.group))
      throw UsageError("product_membership: quotient over a different group");
    std::vector<char> acc = modulo->image_of(factors[0]);
    for (size_t i = 1; i < factors.size(); ++i)
      acc = subset_product(modulo->target->table, acc, modulo->image_of(factors[i]));
    return {acc[modulo->apply(g)] ? Tri::True : Tri::False, 0};
  }
  switch (g.group->backend) {
    case Backend::FreeAbelian: {
      Lattice sum = factors[0].lattice();
      for (size_t i = 1; i < factors.size(); ++i) sum = sum.sum(factors[i].lattice());
      return {sum.contains(g.vec) ? Tri::True : Tri::False, 0};
    }
    case Backend::Finite: {
      std::vector<char> acc = factors[0].member_mask();
      for (size_t i = 1; i < factors.size(); ++i)
        acc = subset_product(g.group->table, acc, factors[i].member_mask());
      return {acc[g.idx] ? Tri::True : Tri::False, 0};
    }
    case Backend::Free: {
      if (factors.size() == 1) return {factors[0].contains(g) ? Tri::True : Tri::False, 0};
      // abelianized obstruction gives certified negatives
      GroupPtr ab = Group::free_abelian(g.group->rank);
      auto abelianize = [&](const Word& w) {
        Vec v(g.group->rank, 0);
        for (int l : w) v[std::abs(l) - 1] += (l > 0 ? 1 : -1);
        return v;
      };
      Mat ab_gens;
      for (const auto& f : factors)
        for (const auto& w : f.automaton().generator_words()) ab_gens.push_back(abelianize(w));
      if (!Lattice(g.group->rank, ab_gens).contains(abelianize(g.word)))
        return {Tri::False, 0};
      if (bounded_product_search(g, factors, 0, search_bound)) return {Tri::True, 0};
      return {Tri::Unknown, search_bound};
    }
  }
  throw UsageError("product_membership: bad backend");
}

std::vector<Elem> coset_reps(const Subgroup& h) {
  auto idx = h.index();
  if (!idx)
    throw UnsupportedError("coset_reps: subgroup has infinite index (index check failed)");
  std::vector<Elem> out;
  switch (h.group->backend) {
    case Backend::FreeAbelian:
      for (const auto& r : h.lattice().residues()) out.push_back(elem_from_vec(h.group, r));
      break;
    case Backend::Free:
      for (const auto& w : h.automaton().coset_reps()) out.push_back(elem_from_word(h.group, w));
      break;
    case Backend::Finite: {
      const auto& t = h.group->table;
      std::vector<bool> covered(t.n, false);
      std::vector<int> order{t.identity};
      for (int i = 0; i < t.n; ++i)
        if (i != t.identity) order.push_back(i);
      for (int g : order) {
        if (covered[g]) continue;
        out.push_back(elem_from_index(h.group, g));
        for (int x = 0; x < t.n; ++x)
          if (h.member_mask()[x]) covered[t.times(g, x)] = true;
      }
      break;
    }
  }
  return out;
}

AbelianInvariants quotient_invariants(const Subgroup& h) {
  if (h.group->backend != Backend::FreeAbelian)
    throw UnsupportedError("quotient_invariants: non-abelian backend");
  auto shape = quotient_shape(h.group->rank, h.lattice());
  return {shape.torsion, shape.free_rank};
}

// -------------------------------------------------------------- QuotientStream

QuotientStream::QuotientStream(GroupPtr g, QuotientConstraints c)
    : group_(std::move(g)), cons_(c) {
  if (group_->backend == Backend::FreeAbelian) {
    lattices_ = sublattices_up_to_index(group_->rank, std::max<std::int64_t>(cons_.bound, 0));
  } else if (group_->backend == Backend::Free) {
    degree_ = 0;  // advanced on first next()
  }
}

bool QuotientStream::advance_tuple() {
  // odometer over perms_^rank, first slot slowest
  if (odometer_.empty()) {
    odometer_.assign(group_->rank, 0);
    return !perms_.empty();
  }
  int i = group_->rank - 1;
  while (i >= 0) {
    if (++odometer_[i] < perms_.size()) return true;
    odometer_[i--] = 0;
  }
  return false;
}

std::optional<FiniteQuotient> QuotientStream::next() {
  if (group_->backend == Backend::FreeAbelian) {
    while (pos_ < lattices_.size()) {
      const Lattice& L = lattices_[pos_++];
      std::int64_t idx = *L.index();
      if (cons_.exact_index && idx != *cons_.exact_index) continue;
      if (cons_.divides && (*cons_.divides % idx) != 0) continue;
      return FiniteQuotient::from_lattice(group_, L);
    }
    return std::nullopt;
  }
  if (group_->backend != Backend::Free) return std::nullopt;
  while (true) {
    if (!advance_tuple()) {
      ++degree_;
      if (degree_ > cons_.bound) return std::nullopt;
      perms_ = all_perms_ordered(degree_);
      odometer_.clear();
      seen_.emplace_back();
      if (!advance_tuple()) continue;
    }
    std::vector<Perm> tuple;
    for (size_t s : odometer_) tuple.push_back(perms_[s]);
    // canonical form under simultaneous conjugation
    std::vector<int> canon;
    for (const auto& pi : perms_) {
      std::vector<int> form;
      Perm pinv = perm_inverse(pi);
      for (const auto& sigma : tuple) {
        Perm c = perm_compose(perm_compose(pi, sigma), pinv);
        form.insert(form.end(), c.begin(), c.end());
      }
      if (canon.empty() || form < canon) canon = std::move(form);
    }
    auto& seen = seen_.back();
    if (std::find(seen.begin(), seen.end(), canon) != seen.end()) continue;
    seen.push_back(canon);
    FiniteQuotient q = FiniteQuotient::from_perms(group_, tuple, degree_);
    if (cons_.exact_index && q.kernel_index != *cons_.exact_index) continue;
    if (cons_.divides && (*cons_.divides % q.kernel_index) != 0) continue;
    return q;
  }
}

std::vector<FiniteQuotient> enumerate_finite_quotients(const GroupPtr& g, QuotientConstraints c) {
  QuotientStream st(g, c);
  std::vector<FiniteQuotient> out;
  while (auto q = st.next()) out.push_back(std::move(*q));
  return out;
}

bool double_coset_contains(const Stallings& mi, const Word& g, const Stallings& mj,
                           const Word& x) {
  int rank = mi.rank();
  std::vector<RawEdge> edges;
  for (const auto& e : mi.edges()) edges.push_back(e);
  int off = mi.num_states();
  for (const auto& e : mj.edges()) edges.push_back({e.s + off, e.letter, e.t + off});
  int n = off + mj.num_states();
  int cur = 0;  // base of mi
  for (size_t i = 0; i < g.size(); ++i) {
    int nxt = (i + 1 == g.size()) ? off : n++;
    edges.push_back({cur, g[i], nxt});
    cur = nxt;
  }
  if (g.empty()) {
    // identity tail: merge the two bases with a dummy loop pair
    // handled by adding a fresh letterless merge is not possible; instead add
    // a two-edge path u -a-> v, u' -a-> v with shared endpoints to force fold
    // Simpler: trace in the folded graph built with bases identified.
    FoldedTrace ft(rank, n, edges, 0, off, true);
    return ft.accepts(x);
  }
  FoldedTrace ft(rank, n, edges, 0, off, false);
  return ft.accepts(x);
}

}  // namespace finact
