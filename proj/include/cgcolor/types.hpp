#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cgcolor {

/// Opaque handle for a discrete random variable.
struct VarId {
  std::uint32_t value{};

  constexpr VarId() = default;
  constexpr explicit VarId(std::uint32_t v) : value(v) {}
  constexpr auto operator<=>(const VarId&) const = default;
};

/// A state of a variable, 0..card-1.
using Label = std::uint32_t;

/// Full assignment over a table scope, one label per scope position.
using Assignment = std::vector<Label>;

/// Sorted, duplicate-free set of variables.
using VarSet = std::vector<VarId>;

/// Partial assignment keyed by variable.
using VarAssignment = std::map<VarId, Label>;

/// Sorts and deduplicates.
VarSet make_varset(std::vector<VarId> vars);
bool is_subset(const VarSet& small, const VarSet& big);
VarSet intersect(const VarSet& a, const VarSet& b);
VarSet unite(const VarSet& a, const VarSet& b);
bool contains(const VarSet& set, VarId v);

/// Bijection between variable names and ids. Ids are assigned densely in
/// insertion order.
class VariableRegistry {
 public:
  VarId add(std::string name);
  /// Returns the existing id or adds a new variable.
  VarId intern(std::string_view name);
  VarId id(std::string_view name) const;
  bool has(std::string_view name) const;
  const std::string& name(VarId v) const;
  std::size_t size() const { return names_.size(); }
  std::vector<VarId> ids() const;

  /// Comma-joined names of a set, e.g. "A,C,D,F".
  std::string join(const VarSet& vars, std::string_view sep = ",") const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, VarId> by_name_;
};

/// Belief or observation inconsistency: some table lost all support.
/// Under 0/1 potentials this certifies that no solution exists.
class Contradiction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cgcolor

template <>
struct std::hash<cgcolor::VarId> {
  std::size_t operator()(const cgcolor::VarId& v) const noexcept { return std::hash<std::uint32_t>{}(v.value); }
};
