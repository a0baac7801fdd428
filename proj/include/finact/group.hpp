#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "finact/lattice.hpp"
#include "finact/stallings.hpp"

namespace finact {

enum class Backend { FreeAbelian, Free, Finite };

/// Permutation in one-line notation, 0-based.
using Perm = std::vector<int>;
Perm perm_identity(int n);
Perm perm_compose(const Perm& a, const Perm& b);  // a after b
Perm perm_inverse(const Perm& a);
std::string perm_cycle_string(const Perm& p);
/// Key ordering permutations by (support size, cycle decomposition lex);
/// identity first, then (12), (13), ..., then 3-cycles, ...
std::vector<int> perm_order_key(const Perm& p);
std::vector<Perm> all_perms_ordered(int n);

/// A finite group given by its multiplication table.
struct FiniteTable {
  int n = 0;
  int identity = 0;
  std::vector<int> mul;  // mul[a*n+b] = a*b
  std::vector<int> inv;
  std::vector<std::string> names;

  int times(int a, int b) const { return mul[a * n + b]; }
  int inverse(int a) const { return inv[a]; }
};

class Group;
using GroupPtr = std::shared_ptr<const Group>;

/// Immutable descriptor of a finitely generated group, one of three backends.
class Group {
 public:
  Backend backend;
  int rank = 0;                     // FreeAbelian / Free
  FiniteTable table;                // Finite
  std::vector<int> finite_gens;     // Finite: chosen generating elements
  std::vector<std::string> labels;  // generator labels

  static GroupPtr free_abelian(int d);
  static GroupPtr free(int k);
  static GroupPtr finite(FiniteTable t, std::vector<int> gens);
  /// Symmetric group S_n with elements in canonical order.
  static GroupPtr symmetric(int n);
  /// Cyclic group Z/c.
  static GroupPtr cyclic(std::int64_t c);

  int num_generators() const;
  std::string describe() const;
};

bool same_group(const GroupPtr& a, const GroupPtr& b);

/// Element of a group; payload depends on the backend.
struct Elem {
  GroupPtr group;
  Vec vec;    // FreeAbelian
  Word word;  // Free (reduced)
  int idx = 0;  // Finite

  bool is_identity() const;
  std::string str() const;
  bool operator==(const Elem& o) const;
  bool operator<(const Elem& o) const;  // canonical order within one group
};

Elem identity_elem(const GroupPtr& g);
Elem mul(const Elem& a, const Elem& b);
Elem inverse(const Elem& a);
Elem elem_from_vec(const GroupPtr& g, Vec v);
Elem elem_from_word(const GroupPtr& g, Word w);
Elem elem_from_index(const GroupPtr& g, int idx);
/// Parses "a", "aB" style words (uppercase = inverse) or "(1,-2)" vectors.
Elem parse_elem(const GroupPtr& g, const std::string& s);

/// Elements of the radius-r word ball in canonical order, identity first.
std::vector<Elem> word_ball(const GroupPtr& g, int radius);

/// Finitely generated subgroup with a backend-specific exact representation.
class Subgroup {
 public:
  GroupPtr group;

  static Subgroup from_lattice(const GroupPtr& g, const Mat& gens);
  static Subgroup from_words(const GroupPtr& g, const std::vector<Word>& gens);
  static Subgroup from_generators(const GroupPtr& g, const std::vector<Elem>& gens);
  static Subgroup trivial(const GroupPtr& g);
  static Subgroup whole(const GroupPtr& g);

  bool contains(const Elem& e) const;
  std::optional<std::int64_t> index() const;
  bool is_trivial() const;
  bool is_whole_group() const;
  bool equals(const Subgroup& o) const;
  bool contains_subgroup(const Subgroup& o) const;
  bool is_normal() const;  // exact: abelian, finite backend, finite-index free

  Subgroup join(const Subgroup& o) const;  // subgroup generated by the union
  Subgroup intersect(const Subgroup& o) const;
  Subgroup conjugate(const Elem& x) const;  // x H x^-1
  std::vector<Elem> generators() const;

  /// Subgroup elements of word length <= radius (identity included).
  std::vector<Elem> ball(int radius) const;

  const Lattice& lattice() const { return lat_; }
  const Stallings& automaton() const { return aut_; }
  const std::vector<char>& member_mask() const { return members_; }

  std::string str() const;

 private:
  Lattice lat_;
  Stallings aut_;
  std::vector<char> members_;
};

/// Surjection onto a finite group, carried as generator images plus the
/// materialized image group.  kernel_index equals the order of the image.
struct FiniteQuotient {
  GroupPtr source;
  GroupPtr target;          // Finite backend
  std::vector<int> images;  // image of source generator i
  std::int64_t kernel_index = 1;

  Lattice kernel_lat;                  // FreeAbelian sources
  std::map<Vec, int> residue_index;    // canonical residue -> target element

  int apply(const Elem& g) const;
  std::vector<char> image_of(const Subgroup& h) const;
  Subgroup kernel() const;
  /// phi^-1(S) for a subgroup subset S of the target.
  Subgroup preimage(const std::vector<char>& subset) const;
  std::string describe() const;

  static FiniteQuotient from_lattice(const GroupPtr& g, const Lattice& L);
  static FiniteQuotient from_perms(const GroupPtr& g, const std::vector<Perm>& images, int degree);
};

/// Subset product in a finite table group.
std::vector<char> subset_product(const FiniteTable& t, const std::vector<char>& a,
                                 const std::vector<char>& b);
std::vector<char> subset_closure(const FiniteTable& t, const std::vector<int>& gens);

enum class Tri { True, False, Unknown };
struct TriResult {
  Tri value = Tri::Unknown;
  int bound = 0;  // search bound used when value == Unknown
  bool certified() const { return value != Tri::Unknown; }
  bool is_true() const { return value == Tri::True; }
};

bool subgroup_membership(const Subgroup& h, const Elem& g);

/// Membership of g in the product H_1 H_2 ... H_n, optionally modulo a finite
/// quotient (then exact for every backend).  Without a quotient: exact for
/// FreeAbelian, Finite and single free factors; bounded search otherwise.
TriResult product_membership(const Elem& g, const std::vector<Subgroup>& factors,
                             const FiniteQuotient* modulo = nullptr, int search_bound = 6);

/// Left coset representatives of a finite-index subgroup, identity first.
std::vector<Elem> coset_reps(const Subgroup& h);

struct AbelianInvariants {
  std::vector<std::int64_t> torsion;  // invariant factors > 1
  int free_rank = 0;
};
/// Invariant factors of Z^d / H (FreeAbelian backend only).
AbelianInvariants quotient_invariants(const Subgroup& h);

struct QuotientConstraints {
  std::int64_t bound = 1;  // FreeAbelian: index bound; Free: symmetric degree bound
  std::optional<std::int64_t> exact_index;
  std::optional<std::int64_t> divides;  // keep only kernel_index dividing this
};

/// Deterministic stream of finite quotients in canonical order.
class QuotientStream {
 public:
  QuotientStream(GroupPtr g, QuotientConstraints c);
  std::optional<FiniteQuotient> next();

 private:
  GroupPtr group_;
  QuotientConstraints cons_;
  // FreeAbelian
  std::vector<Lattice> lattices_;
  size_t pos_ = 0;
  // Free
  int degree_ = 0;
  std::vector<Perm> perms_;
  std::vector<size_t> odometer_;
  std::vector<std::vector<std::vector<int>>> seen_;  // canonical tuples per degree
  bool advance_tuple();
};

std::vector<FiniteQuotient> enumerate_finite_quotients(const GroupPtr& g, QuotientConstraints c);

/// Exact membership x in  Mi * g * Mj  for free-group subgroups, via the
/// folded double-coset graph.
bool double_coset_contains(const Stallings& mi, const Word& g, const Stallings& mj, const Word& x);

/// Errors: bad arguments / contract violations by the caller.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
/// Errors: a stated operation precondition failed on this input.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Errors: the request is outside the supported fragment.
struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace finact
