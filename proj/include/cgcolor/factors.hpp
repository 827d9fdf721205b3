#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cgcolor/types.hpp"

namespace cgcolor {

enum class Semiring { sum, max };

/// Raised when a positive potential is divided by an absent (zero) one.
class DivisionByZero : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Sparse discrete factor over a canonical (ascending-id) scope.
///
/// Assignments are addressed by a mixed-radix index with the first scope
/// variable most significant, so ascending index order is lexicographic
/// assignment order. Only strictly positive potentials are stored; every
/// other assignment has potential 0. Tables are immutable values.
class SparseTable {
 public:
  struct Entry {
    std::uint64_t index;
    double value;
  };

  /// Nullary table with no support.
  SparseTable() = default;

  /// All-zero table. `scope` may be in any order; it is sorted together
  /// with `cards`.
  SparseTable(std::vector<VarId> scope, std::vector<Label> cards);

  /// Builds a table from (assignment, potential) pairs whose coordinates
  /// follow the order of `scope` as given. Zero potentials are dropped.
  static SparseTable from_entries(std::vector<VarId> scope, std::vector<Label> cards,
                                  const std::vector<std::pair<Assignment, double>>& entries);

  /// Every assignment present with the same potential.
  static SparseTable uniform(std::vector<VarId> scope, std::vector<Label> cards, double value = 1.0);

  const VarSet& scope() const { return scope_; }
  const std::vector<Label>& cards() const { return cards_; }
  std::size_t arity() const { return scope_.size(); }
  Label card(VarId v) const { return cards_[position(v)]; }
  std::size_t position(VarId v) const;
  bool has(VarId v) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::span<const Entry> entries() const { return entries_; }

  /// Number of joint assignments (product of cardinalities).
  std::uint64_t state_count() const { return state_count_; }

  Assignment decode(std::uint64_t index) const;
  std::uint64_t encode(std::span<const Label> assignment) const;

  /// Potential of an assignment in canonical scope order.
  double value(std::span<const Label> assignment) const;
  double value_at(std::uint64_t index) const;

  double total() const;
  double max_value() const;

  /// Internal: adopt already-sorted, strictly positive entries.
  static SparseTable adopt(VarSet scope, std::vector<Label> cards, std::vector<Entry> entries);

 private:
  void init_strides();

  VarSet scope_;
  std::vector<Label> cards_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t state_count_ = 1;
  std::vector<Entry> entries_;
};

/// Indicator of injective labelings of `vars` with labels 0..k-1.
/// Throws Contradiction when |vars| > k.
SparseTable permutation_factor(const std::vector<VarId>& vars, Label k);

SparseTable multiply(const SparseTable& a, const SparseTable& b);

/// Pointwise num/den with den.scope ⊆ num.scope and 0/0 := 0.
SparseTable divide(const SparseTable& num, const SparseTable& den);

SparseTable marginalize(const SparseTable& t, const VarSet& keep, Semiring semiring);

/// Scales so the total (sum) or the maximum (max) equals 1.
SparseTable normalize(const SparseTable& t, Semiring mode);

/// Conditions on var=value and removes var from the scope.
SparseTable observe(const SparseTable& t, VarId var, Label value);

/// D(p‖q) between sum-normalized copies; +infinity if p has mass where q has none.
double kl_divergence(const SparseTable& p, const SparseTable& q);

/// Maximizing assignment; ties go to the lexicographically smallest.
Assignment argmax_assignment(const SparseTable& t);

}  // namespace cgcolor
