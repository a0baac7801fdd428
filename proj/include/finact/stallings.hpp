#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace finact {

/// Reduced word over the free group F_k: letters are +-(i+1) for generator i.
using Word = std::vector<int>;

Word word_mul(const Word& a, const Word& b);
Word word_inv(const Word& a);
/// Graded shortlex key order: shorter first, then letters compared with
/// a < a^-1 < b < b^-1 < ...
bool word_less(const Word& a, const Word& b);

/// Folded subgroup automaton (Stallings graph) of a finitely generated
/// subgroup of F_k.  States are indices, state 0 is the base point.
/// Transitions are deterministic in both directions after folding.
class Stallings {
 public:
  Stallings() = default;
  Stallings(int rank, const std::vector<Word>& generators);

  int rank() const { return rank_; }
  int num_states() const { return static_cast<int>(delta_.size()); }

  /// Follows `letter` (signed) from `state`; -1 when undefined.
  int step(int state, int letter) const;
  /// Traces a reduced word from `state`; nullopt when the path leaves the graph.
  std::optional<int> trace(int state, const Word& w) const;

  bool accepts(const Word& w) const { return trace(0, w) == std::optional<int>(0); }

  /// Complete automata recognize finite-index subgroups; the index is the
  /// number of states.
  bool is_complete() const;
  std::optional<std::int64_t> index() const;

  /// Coset representatives via breadth-first search in graded shortlex order,
  /// identity first.  Requires finite index.
  std::vector<Word> coset_reps() const;

  /// A free basis read off a spanning tree.
  std::vector<Word> generator_words() const;

  /// Subgroup generated by this subgroup together with `extra` words.
  Stallings join(const std::vector<Word>& extra) const;
  /// Conjugate subgroup w H w^-1.
  Stallings conjugate(const Word& w) const;
  /// Intersection (product automaton, trimmed to the reachable part).
  Stallings intersect(const Stallings& o) const;

  bool equals(const Stallings& o) const;

  /// Positive-letter edges of the graph.
  struct EdgeRec {
    int s, letter, t;
  };
  std::vector<EdgeRec> edges() const;

  /// Rebuilds canonically from an explicit transition table
  /// (delta[state][encoded letter], -1 for undefined).
  static Stallings from_transitions(int rank, const std::vector<std::vector<int>>& delta);

  static int enc(int letter, int rank);

 private:
  int rank_ = 0;
  // delta_[s][e]: e encodes letters as 2*i (generator i) and 2*i+1 (inverse)
  std::vector<std::vector<int>> delta_;

  static int encne(int letter);
  void build(const std::vector<Word>& loops);
};

using RawEdge = Stallings::EdgeRec;

/// Folds an arbitrary edge-labeled graph and decides whether a reduced word
/// labels a path from the start to the accept state.  Used for double-coset
/// membership in free groups.
class FoldedTrace {
 public:
  FoldedTrace(int rank, int num_states, const std::vector<RawEdge>& edges, int start, int accept,
              bool merge_start_accept);
  bool accepts(const Word& w) const;

 private:
  int rank_;
  int start_ = 0, accept_ = 0;
  std::vector<std::vector<int>> delta_;
};

}  // namespace finact
