#include "cgcolor/factors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace cgcolor {

namespace {

std::string describe_scope(const VarSet& scope) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < scope.size(); ++i) os << (i ? "," : "") << scope[i].value;
  os << '}';
  return os.str();
}

std::string describe_assignment(const Assignment& a) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
  os << ')';
  return os.str();
}

bool by_index(const SparseTable::Entry& x, const SparseTable::Entry& y) { return x.index < y.index; }

std::vector<std::uint64_t> strides_for(const std::vector<Label>& cards);

// Maps an index of `from` to sum(coord(v) * weight(v)) over the variables of
// `onto` (onto ⊆ from.scope). With the strides of `onto` as weights this is
// the index of the projected assignment.
class Projector {
 public:
  Projector(const SparseTable& from, const VarSet& onto, const std::vector<std::uint64_t>& weights)
      : strides_(strides_for(from.cards())), weights_(from.arity(), 0) {
    for (std::size_t k = 0; k < onto.size(); ++k) weights_[from.position(onto[k])] = weights[k];
  }

  std::uint64_t operator()(std::uint64_t index) const {
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < strides_.size(); ++i) {
      const std::uint64_t coord = index / strides_[i];
      index -= coord * strides_[i];
      out += coord * weights_[i];
    }
    return out;
  }

 private:
  std::vector<std::uint64_t> strides_;
  std::vector<std::uint64_t> weights_;
};

std::vector<std::uint64_t> strides_for(const std::vector<Label>& cards) {
  std::vector<std::uint64_t> s(cards.size(), 0);
  std::uint64_t stride = 1;
  for (std::size_t i = cards.size(); i-- > 0;) {
    s[i] = stride;
    stride *= cards[i];
  }
  return s;
}

std::vector<Label> cards_for(const SparseTable& t, const VarSet& vars) {
  std::vector<Label> out;
  out.reserve(vars.size());
  for (VarId v : vars) out.push_back(t.card(v));
  return out;
}

void require_matching_cards(const SparseTable& a, const SparseTable& b, const VarSet& shared) {
  for (VarId v : shared) {
    if (a.card(v) != b.card(v)) {
      throw std::invalid_argument("cardinality mismatch for variable " + std::to_string(v.value) + ": " +
                                  std::to_string(a.card(v)) + " vs " + std::to_string(b.card(v)));
    }
  }
}

}  // namespace

SparseTable::SparseTable(std::vector<VarId> scope, std::vector<Label> cards) {
  if (scope.size() != cards.size()) throw std::invalid_argument("scope and cardinality lists differ in length");
  std::vector<std::size_t> order(scope.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return scope[x] < scope[y]; });
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i && scope[order[i]] == scope[order[i - 1]]) {
      throw std::invalid_argument("duplicate variable " + std::to_string(scope[order[i]].value) + " in scope");
    }
    if (cards[order[i]] == 0) throw std::invalid_argument("cardinality must be positive");
    scope_.push_back(scope[order[i]]);
    cards_.push_back(cards[order[i]]);
  }
  init_strides();
}

void SparseTable::init_strides() {
  strides_.assign(cards_.size(), 0);
  std::uint64_t stride = 1;
  for (std::size_t i = cards_.size(); i-- > 0;) {
    strides_[i] = stride;
    if (stride > std::numeric_limits<std::uint64_t>::max() / cards_[i]) {
      throw std::overflow_error("table state space exceeds 64-bit indexing");
    }
    stride *= cards_[i];
  }
  state_count_ = stride;
}

SparseTable SparseTable::from_entries(std::vector<VarId> scope, std::vector<Label> cards,
                                      const std::vector<std::pair<Assignment, double>>& entries) {
  const std::vector<VarId> given = scope;
  SparseTable t(std::move(scope), std::move(cards));
  // canonical position of each given coordinate
  std::vector<std::size_t> to_canonical(given.size());
  for (std::size_t i = 0; i < given.size(); ++i) to_canonical[i] = t.position(given[i]);

  Assignment canonical(given.size());
  for (const auto& [assignment, potential] : entries) {
    if (assignment.size() != given.size()) throw std::invalid_argument("assignment arity does not match scope");
    if (!(potential >= 0.0) || std::isinf(potential)) {
      throw std::invalid_argument("potentials must be finite and non-negative");
    }
    for (std::size_t i = 0; i < given.size(); ++i) canonical[to_canonical[i]] = assignment[i];
    const std::uint64_t idx = t.encode(canonical);
    if (potential > 0.0) t.entries_.push_back({idx, potential});
  }
  std::sort(t.entries_.begin(), t.entries_.end(), by_index);
  for (std::size_t i = 1; i < t.entries_.size(); ++i) {
    if (t.entries_[i].index == t.entries_[i - 1].index) {
      throw std::invalid_argument("duplicate assignment " + describe_assignment(t.decode(t.entries_[i].index)));
    }
  }
  return t;
}

SparseTable SparseTable::uniform(std::vector<VarId> scope, std::vector<Label> cards, double value) {
  if (!(value > 0.0)) throw std::invalid_argument("uniform potential must be positive");
  SparseTable t(std::move(scope), std::move(cards));
  t.entries_.reserve(t.state_count_);
  for (std::uint64_t i = 0; i < t.state_count_; ++i) t.entries_.push_back({i, value});
  return t;
}

SparseTable SparseTable::adopt(VarSet scope, std::vector<Label> cards, std::vector<Entry> entries) {
  SparseTable t;
  t.scope_ = std::move(scope);
  t.cards_ = std::move(cards);
  t.init_strides();
  t.entries_ = std::move(entries);
  return t;
}

std::size_t SparseTable::position(VarId v) const {
  auto it = std::lower_bound(scope_.begin(), scope_.end(), v);
  if (it == scope_.end() || *it != v) {
    throw std::invalid_argument("variable " + std::to_string(v.value) + " not in scope " + describe_scope(scope_));
  }
  return static_cast<std::size_t>(it - scope_.begin());
}

bool SparseTable::has(VarId v) const { return std::binary_search(scope_.begin(), scope_.end(), v); }

Assignment SparseTable::decode(std::uint64_t index) const {
  Assignment a(scope_.size());
  for (std::size_t i = 0; i < scope_.size(); ++i) {
    a[i] = static_cast<Label>(index / strides_[i]);
    index -= a[i] * strides_[i];
  }
  return a;
}

std::uint64_t SparseTable::encode(std::span<const Label> assignment) const {
  if (assignment.size() != scope_.size()) throw std::invalid_argument("assignment arity does not match scope");
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < scope_.size(); ++i) {
    if (assignment[i] >= cards_[i]) {
      throw std::out_of_range("label " + std::to_string(assignment[i]) + " out of range for variable " +
                              std::to_string(scope_[i].value));
    }
    idx += assignment[i] * strides_[i];
  }
  return idx;
}

double SparseTable::value_at(std::uint64_t index) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), Entry{index, 0.0}, by_index);
  return (it != entries_.end() && it->index == index) ? it->value : 0.0;
}

double SparseTable::value(std::span<const Label> assignment) const { return value_at(encode(assignment)); }

double SparseTable::total() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.value;
  return s;
}

double SparseTable::max_value() const {
  double m = 0.0;
  for (const auto& e : entries_) m = std::max(m, e.value);
  return m;
}

SparseTable permutation_factor(const std::vector<VarId>& vars, Label k) {
  if (vars.size() > k) {
    throw Contradiction("clique of " + std::to_string(vars.size()) + " mutually adjacent variables cannot be " +
                        "labelled with only " + std::to_string(k) + " labels");
  }
  SparseTable shape(vars, std::vector<Label>(vars.size(), k));
  const std::size_t n = vars.size();
  std::vector<SparseTable::Entry> entries;
  Assignment current(n);
  std::vector<bool> used(k, false);
  // depth-first in label order yields ascending indices
  auto fill = [&](auto&& self, std::size_t depth) -> void {
    if (depth == n) {
      entries.push_back({shape.encode(current), 1.0});
      return;
    }
    for (Label l = 0; l < k; ++l) {
      if (used[l]) continue;
      used[l] = true;
      current[depth] = l;
      self(self, depth + 1);
      used[l] = false;
    }
  };
  fill(fill, 0);
  return SparseTable::adopt(shape.scope(), shape.cards(), std::move(entries));
}

SparseTable multiply(const SparseTable& a, const SparseTable& b) {
  const VarSet shared = intersect(a.scope(), b.scope());
  require_matching_cards(a, b, shared);

  const VarSet out_scope = unite(a.scope(), b.scope());
  std::vector<Label> out_cards;
  out_cards.reserve(out_scope.size());
  for (VarId v : out_scope) out_cards.push_back(a.has(v) ? a.card(v) : b.card(v));
  const SparseTable shape(out_scope, out_cards);
  const auto out_strides = strides_for(shape.cards());

  const auto shared_strides = strides_for(cards_for(a, shared));
  const Projector a_key(a, shared, shared_strides);
  const Projector b_key(b, shared, shared_strides);

  // a contributes all of its coordinates to the output index, b only the
  // coordinates a lacks
  VarSet b_only;
  for (VarId v : b.scope())
    if (!a.has(v)) b_only.push_back(v);
  auto output_weights = [&](const VarSet& vars) {
    std::vector<std::uint64_t> w;
    for (VarId v : vars) w.push_back(out_strides[shape.position(v)]);
    return w;
  };
  const Projector a_part(a, a.scope(), output_weights(a.scope()));
  const Projector b_part(b, b_only, output_weights(b_only));

  std::unordered_map<std::uint64_t, std::vector<std::size_t>> b_by_key;
  const auto b_entries = b.entries();
  std::vector<std::uint64_t> b_offsets(b_entries.size());
  for (std::size_t j = 0; j < b_entries.size(); ++j) {
    b_by_key[b_key(b_entries[j].index)].push_back(j);
    b_offsets[j] = b_part(b_entries[j].index);
  }

  std::vector<SparseTable::Entry> out;
  for (const auto& ea : a.entries()) {
    auto it = b_by_key.find(a_key(ea.index));
    if (it == b_by_key.end()) continue;
    const std::uint64_t base = a_part(ea.index);
    for (std::size_t j : it->second) {
      const double v = ea.value * b_entries[j].value;
      if (v > 0.0) out.push_back({base + b_offsets[j], v});
    }
  }
  std::sort(out.begin(), out.end(), by_index);
  return SparseTable::adopt(shape.scope(), shape.cards(), std::move(out));
}

SparseTable divide(const SparseTable& num, const SparseTable& den) {
  if (!is_subset(den.scope(), num.scope())) {
    throw std::invalid_argument("divisor scope " + describe_scope(den.scope()) + " is not contained in " +
                                describe_scope(num.scope()));
  }
  require_matching_cards(num, den, den.scope());
  const Projector project(num, den.scope(), strides_for(den.cards()));

  std::vector<SparseTable::Entry> out;
  out.reserve(num.size());
  for (const auto& e : num.entries()) {
    const double d = den.value_at(project(e.index));
    if (d == 0.0) {
      throw DivisionByZero("division of positive potential by zero at assignment " +
                           describe_assignment(num.decode(e.index)) + " over scope " + describe_scope(num.scope()));
    }
    const double q = e.value / d;
    if (q > 0.0) out.push_back({e.index, q});
  }
  return SparseTable::adopt(num.scope(), num.cards(), std::move(out));
}

SparseTable marginalize(const SparseTable& t, const VarSet& keep, Semiring semiring) {
  if (!is_subset(keep, t.scope())) {
    throw std::invalid_argument("cannot keep " + describe_scope(keep) + " from scope " + describe_scope(t.scope()));
  }
  if (keep.size() == t.arity()) return t;
  const std::vector<Label> keep_cards = cards_for(t, keep);
  const Projector project(t, keep, strides_for(keep_cards));

  std::unordered_map<std::uint64_t, std::size_t> slot;
  std::vector<SparseTable::Entry> out;
  for (const auto& e : t.entries()) {
    const std::uint64_t k = project(e.index);
    auto [it, inserted] = slot.try_emplace(k, out.size());
    if (inserted) {
      out.push_back({k, e.value});
    } else if (semiring == Semiring::sum) {
      out[it->second].value += e.value;
    } else {
      out[it->second].value = std::max(out[it->second].value, e.value);
    }
  }
  std::sort(out.begin(), out.end(), by_index);
  return SparseTable::adopt(keep, keep_cards, std::move(out));
}

SparseTable normalize(const SparseTable& t, Semiring mode) {
  if (t.empty()) throw Contradiction("cannot normalize a table with no support over " + describe_scope(t.scope()));
  const double z = mode == Semiring::sum ? t.total() : t.max_value();
  std::vector<SparseTable::Entry> out(t.entries().begin(), t.entries().end());
  for (auto& e : out) e.value /= z;
  std::erase_if(out, [](const SparseTable::Entry& e) { return !(e.value > 0.0); });
  return SparseTable::adopt(t.scope(), t.cards(), std::move(out));
}

SparseTable observe(const SparseTable& t, VarId var, Label value) {
  const std::size_t pos = t.position(var);
  if (value >= t.cards()[pos]) {
    throw std::out_of_range("observed label " + std::to_string(value) + " out of range for variable " +
                            std::to_string(var.value));
  }
  VarSet rest;
  std::vector<Label> rest_cards;
  for (std::size_t i = 0; i < t.arity(); ++i) {
    if (i == pos) continue;
    rest.push_back(t.scope()[i]);
    rest_cards.push_back(t.cards()[i]);
  }
  const Projector project(t, rest, strides_for(rest_cards));
  const auto strides = strides_for(t.cards());

  std::vector<SparseTable::Entry> out;
  for (const auto& e : t.entries()) {
    if ((e.index / strides[pos]) % t.cards()[pos] != value) continue;
    out.push_back({project(e.index), e.value});
  }
  if (out.empty()) {
    throw Contradiction("observing variable " + std::to_string(var.value) + " = " + std::to_string(value) +
                        " leaves no support in factor over " + describe_scope(t.scope()));
  }
  // removing one coordinate preserves relative order
  return SparseTable::adopt(std::move(rest), std::move(rest_cards), std::move(out));
}

double kl_divergence(const SparseTable& p, const SparseTable& q) {
  if (p.scope() != q.scope() || p.cards() != q.cards()) {
    throw std::invalid_argument("kl_divergence requires identical scopes: " + describe_scope(p.scope()) + " vs " +
                                describe_scope(q.scope()));
  }
  if (p.empty() || q.empty()) throw std::invalid_argument("kl_divergence requires non-empty tables");
  const double zp = p.total();
  const double zq = q.total();
  const auto qe = q.entries();
  std::size_t j = 0;
  double d = 0.0;
  for (const auto& e : p.entries()) {
    while (j < qe.size() && qe[j].index < e.index) ++j;
    if (j == qe.size() || qe[j].index != e.index) return std::numeric_limits<double>::infinity();
    const double pn = e.value / zp;
    const double qn = qe[j].value / zq;
    d += pn * std::log(pn / qn);
  }
  return std::max(d, 0.0);
}

Assignment argmax_assignment(const SparseTable& t) {
  if (t.empty()) throw std::invalid_argument("argmax of a table with no support");
  const SparseTable::Entry* best = nullptr;
  for (const auto& e : t.entries())
    if (!best || e.value > best->value) best = &e;
  return t.decode(best->index);
}

}  // namespace cgcolor
