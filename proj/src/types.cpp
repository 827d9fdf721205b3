#include "cgcolor/types.hpp"

#include <algorithm>
#include <iterator>

namespace cgcolor {

VarSet make_varset(std::vector<VarId> vars) {
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

bool is_subset(const VarSet& small, const VarSet& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

VarSet intersect(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

VarSet unite(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool contains(const VarSet& set, VarId v) { return std::binary_search(set.begin(), set.end(), v); }

VarId VariableRegistry::add(std::string name) {
  if (name.empty()) throw std::invalid_argument("variable name must be non-empty");
  if (by_name_.count(name)) throw std::invalid_argument("duplicate variable name '" + name + "'");
  VarId id{static_cast<std::uint32_t>(names_.size())};
  by_name_.emplace(name, id);
  names_.push_back(std::move(name));
  return id;
}

VarId VariableRegistry::intern(std::string_view name) {
  if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) return it->second;
  return add(std::string(name));
}

VarId VariableRegistry::id(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) throw std::out_of_range("unknown variable '" + std::string(name) + "'");
  return it->second;
}

bool VariableRegistry::has(std::string_view name) const { return by_name_.count(std::string(name)) > 0; }

const std::string& VariableRegistry::name(VarId v) const {
  if (v.value >= names_.size()) throw std::out_of_range("unknown variable id " + std::to_string(v.value));
  return names_[v.value];
}

std::vector<VarId> VariableRegistry::ids() const {
  std::vector<VarId> out;
  out.reserve(names_.size());
  for (std::uint32_t i = 0; i < names_.size(); ++i) out.emplace_back(i);
  return out;
}

std::string VariableRegistry::join(const VarSet& vars, std::string_view sep) const {
  std::string out;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i) out += sep;
    out += name(vars[i]);
  }
  return out;
}

}  // namespace cgcolor
