#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace finact {

using Vec = std::vector<std::int64_t>;
using Mat = std::vector<Vec>;  // list of rows

/// Integer lattices in Z^d kept in a canonical column-style Hermite form.
///
/// Generators are stored as vectors whose last nonzero coordinate (the pivot)
/// is positive and strictly increasing from one generator to the next, with
/// the entries of later generators reduced modulo earlier pivots.  Two
/// lattices are equal iff their canonical generator lists are equal.
class Lattice {
 public:
  Lattice() = default;
  /// Canonicalizes the span of `generators` inside Z^dim.
  Lattice(int dim, const Mat& generators);

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(gens_.size()); }
  const Mat& generators() const { return gens_; }

  bool contains(const Vec& v) const;
  /// Canonical residue of v modulo the lattice (pivot coords in [0, pivot)).
  Vec reduce(Vec v) const;

  bool operator==(const Lattice& o) const { return dim_ == o.dim_ && gens_ == o.gens_; }

  /// Sum of lattices (join).
  Lattice sum(const Lattice& o) const;
  /// Intersection, via an integer kernel computation.
  Lattice intersect(const Lattice& o) const;
  bool contains_lattice(const Lattice& o) const;

  /// [Z^d : L], or nullopt when the index is infinite (rank < dim).
  std::optional<std::int64_t> index() const;

  /// All canonical residues, in lexicographic order of reduced coordinates,
  /// identity first.  Requires finite index.
  std::vector<Vec> residues() const;

  /// c * Z^d.
  static Lattice scaled_identity(int dim, std::int64_t c);
  static Lattice zero(int dim) { return Lattice(dim, {}); }

 private:
  int dim_ = 0;
  Mat gens_;                 // canonical generators, pivot rows increasing
  std::vector<int> pivot_;   // pivot_[k] = pivot coordinate of gens_[k]
};

/// Smith normal form data for a generator matrix of a sublattice L <= Z^d.
struct SmithForm {
  std::vector<std::int64_t> diag;  // s_1 | s_2 | ... (non-negative)
  Mat V;                           // unimodular: x in L  <=>  x*Vinv in rowspace(diag)
  Mat Vinv;
};

/// Computes a Smith form of the (rows x d) matrix `rows` with the right
/// transform tracked, so that torsion witnesses can be pulled back to Z^d.
SmithForm smith_form(int dim, const Mat& rows);

/// Invariant factors of Z^d / L: torsion factors (those > 1) and free rank.
struct AbelianQuotientShape {
  std::vector<std::int64_t> torsion;
  int free_rank = 0;
};
AbelianQuotientShape quotient_shape(int dim, const Lattice& L);

/// All full-rank sublattices of Z^dim of index in [1, bound], in canonical
/// order: index ascending, then diagonal tuple lexicographic, then
/// off-diagonal entries lexicographic.
std::vector<Lattice> sublattices_up_to_index(int dim, std::int64_t bound);

std::int64_t gcd64(std::int64_t a, std::int64_t b);
std::int64_t lcm64(std::int64_t a, std::int64_t b);

}  // namespace finact
