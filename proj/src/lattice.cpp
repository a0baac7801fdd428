#include "finact/lattice.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <stdexcept>

namespace finact {

std::int64_t gcd64(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }
std::int64_t lcm64(std::int64_t a, std::int64_t b) {
  if (a == 0 || b == 0) return 0;
  return std::abs(a / std::gcd(a, b) * b);
}

namespace {

// floor division with positive divisor
std::int64_t fdiv(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b, r = a % b;
  return (r != 0 && r < 0) ? q - 1 : q;
}

int last_nonzero(const Vec& v) {
  for (int i = static_cast<int>(v.size()) - 1; i >= 0; --i)
    if (v[i] != 0) return i;
  return -1;
}

void axpy(Vec& dst, std::int64_t c, const Vec& src) {
  for (size_t i = 0; i < dst.size(); ++i) dst[i] += c * src[i];
}

}  // namespace

Lattice::Lattice(int dim, const Mat& generators) : dim_(dim) {
  std::vector<Vec> work;
  for (const auto& g : generators) {
    if (static_cast<int>(g.size()) != dim) throw std::invalid_argument("generator dimension mismatch");
    if (last_nonzero(g) >= 0) work.push_back(g);
  }
  // eliminate from the top coordinate down; each pass leaves at most one
  // generator whose last nonzero coordinate is the current one
  for (int c = dim - 1; c >= 0; --c) {
    int lead = -1;
    for (size_t i = 0; i < work.size(); ++i) {
      if (work[i][c] != 0) {
        if (lead < 0) { lead = static_cast<int>(i); continue; }
        while (work[i][c] != 0) {
          std::int64_t q = work[lead][c] / work[i][c];
          axpy(work[lead], -q, work[i]);
          std::swap(work[lead], work[i]);
        }
      }
    }
    if (lead < 0) continue;
    Vec g = work[lead];
    work.erase(work.begin() + lead);
    if (g[c] < 0)
      for (auto& x : g) x = -x;
    gens_.push_back(std::move(g));
    pivot_.push_back(c);
  }
  std::reverse(gens_.begin(), gens_.end());
  std::reverse(pivot_.begin(), pivot_.end());
  // reduce entries of later generators at earlier pivots
  for (size_t k = 0; k < gens_.size(); ++k)
    for (size_t l = k + 1; l < gens_.size(); ++l) {
      std::int64_t q = fdiv(gens_[l][pivot_[k]], gens_[k][pivot_[k]]);
      if (q != 0) axpy(gens_[l], -q, gens_[k]);
    }
}

Vec Lattice::reduce(Vec v) const {
  for (int k = static_cast<int>(gens_.size()) - 1; k >= 0; --k) {
    std::int64_t q = fdiv(v[pivot_[k]], gens_[k][pivot_[k]]);
    if (q != 0) axpy(v, -q, gens_[k]);
  }
  return v;
}

bool Lattice::contains(const Vec& v) const {
  Vec r = reduce(v);
  return std::all_of(r.begin(), r.end(), [](std::int64_t x) { return x == 0; });
}

Lattice Lattice::sum(const Lattice& o) const {
  if (dim_ != o.dim_) throw std::invalid_argument("lattice dimension mismatch");
  Mat all = gens_;
  all.insert(all.end(), o.gens_.begin(), o.gens_.end());
  return Lattice(dim_, all);
}

bool Lattice::contains_lattice(const Lattice& o) const {
  return std::all_of(o.gens_.begin(), o.gens_.end(), [&](const Vec& g) { return contains(g); });
}

Lattice Lattice::intersect(const Lattice& o) const {
  if (dim_ != o.dim_) throw std::invalid_argument("lattice dimension mismatch");
  // rows of M: generators of this, then negated generators of o.  Left-kernel
  // vectors w give intersection elements (first block of w) * gens_.
  int k = rank(), l = o.rank();
  Mat M = gens_;
  for (const auto& g : o.gens_) {
    Vec neg(g.size());
    for (size_t i = 0; i < g.size(); ++i) neg[i] = -g[i];
    M.push_back(neg);
  }
  int m = k + l;
  Mat T(m, Vec(m, 0));
  for (int i = 0; i < m; ++i) T[i][i] = 1;
  int row = 0;
  for (int col = 0; col < dim_ && row < m; ++col) {
    int lead = -1;
    for (int i = row; i < m; ++i) {
      if (M[i][col] != 0) {
        if (lead < 0) { lead = i; continue; }
        while (M[i][col] != 0) {
          std::int64_t q = M[lead][col] / M[i][col];
          axpy(M[lead], -q, M[i]);
          axpy(T[lead], -q, T[i]);
          std::swap(M[lead], M[i]);
          std::swap(T[lead], T[i]);
        }
      }
    }
    if (lead < 0) continue;
    std::swap(M[row], M[lead]);
    std::swap(T[row], T[lead]);
    ++row;
  }
  Mat inter_gens;
  for (int i = row; i < m; ++i) {
    Vec x(dim_, 0);
    for (int j = 0; j < k; ++j) axpy(x, T[i][j], gens_[j]);
    inter_gens.push_back(std::move(x));
  }
  return Lattice(dim_, inter_gens);
}

std::optional<std::int64_t> Lattice::index() const {
  if (rank() < dim_) return std::nullopt;
  std::int64_t idx = 1;
  for (int k = 0; k < dim_; ++k) idx *= gens_[k][pivot_[k]];
  return idx;
}

std::vector<Vec> Lattice::residues() const {
  auto idx = index();
  if (!idx) throw std::invalid_argument("residues: lattice has infinite index");
  std::vector<Vec> out;
  out.reserve(*idx);
  Vec cur(dim_, 0);
  // odometer over pivot bounds, last coordinate fastest; identity first
  while (true) {
    out.push_back(cur);
    int c = dim_ - 1;
    while (c >= 0) {
      if (++cur[c] < gens_[c][pivot_[c]]) break;
      cur[c] = 0;
      --c;
    }
    if (c < 0) break;
  }
  return out;
}

Lattice Lattice::scaled_identity(int dim, std::int64_t c) {
  Mat gens;
  for (int i = 0; i < dim; ++i) {
    Vec v(dim, 0);
    v[i] = c;
    gens.push_back(v);
  }
  return Lattice(dim, gens);
}

namespace {

// Working state for the Smith reduction: row ops are free, column ops are
// mirrored into V (and inversely into Vinv).
struct SmithWork {
  Mat A, V, Vinv;
  int m, dim;

  void col_swap(int a, int b) {
    for (auto& r : A) std::swap(r[a], r[b]);
    for (auto& r : V) std::swap(r[a], r[b]);
    std::swap(Vinv[a], Vinv[b]);
  }
  void col_axpy(int dst, std::int64_t c, int src) {
    for (auto& r : A) r[dst] += c * r[src];
    for (auto& r : V) r[dst] += c * r[src];
    axpy(Vinv[src], -c, Vinv[dst]);
  }
  void col_neg(int a) {
    for (auto& r : A) r[a] = -r[a];
    for (auto& r : V) r[a] = -r[a];
    for (auto& x : Vinv[a]) x = -x;
  }

  // Diagonalize the block starting at position t; returns one past the last
  // pivot position produced.
  int eliminate_from(int t) {
    int lim = std::min(m, dim);
    while (t < lim) {
      int pi = -1, pj = -1;
      for (int i = t; i < m && pi < 0; ++i)
        for (int j = t; j < dim; ++j)
          if (A[i][j] != 0) { pi = i; pj = j; break; }
      if (pi < 0) break;
      std::swap(A[t], A[pi]);
      if (pj != t) col_swap(t, pj);
      bool again = true;
      while (again) {
        again = false;
        for (int i = t + 1; i < m; ++i)
          while (A[i][t] != 0) {
            std::int64_t q = A[t][t] / A[i][t];
            axpy(A[t], -q, A[i]);
            std::swap(A[t], A[i]);
          }
        for (int j = t + 1; j < dim; ++j)
          while (A[t][j] != 0) {
            std::int64_t q = A[t][t] / A[t][j];
            col_axpy(t, -q, j);
            col_swap(t, j);
            again = true;
          }
      }
      if (A[t][t] < 0) col_neg(t);
      ++t;
    }
    return t;
  }
};

}  // namespace

SmithForm smith_form(int dim, const Mat& rows) {
  SmithWork w;
  w.A = rows;
  for (auto& r : w.A)
    if (static_cast<int>(r.size()) != dim) throw std::invalid_argument("smith_form: bad row width");
  w.m = static_cast<int>(w.A.size());
  w.dim = dim;
  w.V.assign(dim, Vec(dim, 0));
  w.Vinv.assign(dim, Vec(dim, 0));
  for (int i = 0; i < dim; ++i) w.V[i][i] = w.Vinv[i][i] = 1;

  int t = w.eliminate_from(0);
  // enforce s_i | s_{i+1}
  bool fixed = false;
  while (!fixed) {
    fixed = true;
    for (int i = 0; i + 1 < t; ++i) {
      if (w.A[i][i] != 0 && w.A[i + 1][i + 1] % w.A[i][i] != 0) {
        w.col_axpy(i, 1, i + 1);
        w.eliminate_from(i);
        fixed = false;
        break;
      }
    }
  }
  SmithForm out;
  out.diag.assign(dim, 0);
  for (int i = 0; i < t; ++i) out.diag[i] = w.A[i][i];
  out.V = w.V;
  out.Vinv = w.Vinv;
  return out;
}

AbelianQuotientShape quotient_shape(int dim, const Lattice& L) {
  SmithForm sf = smith_form(dim, L.generators());
  AbelianQuotientShape shape;
  for (int i = 0; i < dim; ++i) {
    if (sf.diag[i] == 0)
      ++shape.free_rank;
    else if (sf.diag[i] > 1)
      shape.torsion.push_back(sf.diag[i]);
  }
  return shape;
}

namespace {

void diag_tuples(std::int64_t n, int pos, int dim, Vec& cur, std::vector<Vec>& out) {
  if (pos == dim) {
    if (n == 1) out.push_back(cur);
    return;
  }
  for (std::int64_t d = 1; d <= n; ++d) {
    if (n % d != 0) continue;
    cur[pos] = d;
    diag_tuples(n / d, pos + 1, dim, cur, out);
  }
}

void fill_offdiag(const Vec& diag, int dim, int gen, int coord, Mat& gens, std::vector<Lattice>& out) {
  if (gen == dim) {
    out.emplace_back(dim, gens);
    return;
  }
  if (coord == gen) {
    gens[gen][gen] = diag[gen];
    fill_offdiag(diag, dim, gen + 1, 0, gens, out);
    gens[gen][gen] = 0;
    return;
  }
  for (std::int64_t v = 0; v < diag[coord]; ++v) {
    gens[gen][coord] = v;
    fill_offdiag(diag, dim, gen, coord + 1, gens, out);
  }
  gens[gen][coord] = 0;
}

}  // namespace

std::vector<Lattice> sublattices_up_to_index(int dim, std::int64_t bound) {
  std::vector<Lattice> out;
  for (std::int64_t n = 1; n <= bound; ++n) {
    std::vector<Vec> diags;
    Vec cur(dim, 1);
    diag_tuples(n, 0, dim, cur, diags);
    std::sort(diags.begin(), diags.end());
    for (const auto& d : diags) {
      Mat gens(dim, Vec(dim, 0));
      fill_offdiag(d, dim, 0, 0, gens, out);
    }
  }
  return out;
}

}  // namespace finact
