#include "cgcolor/coloring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iterator>
#include <random>
#include <sstream>

namespace cgcolor {

void ColoringProblem::add_edge(VarId a, VarId b) {
  if (a == b) throw std::invalid_argument("self-edge on '" + names.name(a) + "'");
  if (a.value >= names.size() || b.value >= names.size()) throw std::out_of_range("edge references unknown variable");
  edges.insert(std::minmax(a, b));
}

bool ColoringProblem::adjacent(VarId a, VarId b) const { return edges.count(std::minmax(a, b)) > 0; }

std::vector<VarSet> ColoringProblem::neighbours() const {
  std::vector<VarSet> adj(names.size());
  for (auto [a, b] : edges) {
    adj[a.value].push_back(b);
    adj[b.value].push_back(a);
  }
  for (auto& n : adj) std::sort(n.begin(), n.end());
  return adj;
}

void ColoringProblem::validate() const {
  for (auto [v, label] : givens) {
    if (v.value >= names.size()) throw std::invalid_argument("given on unknown variable");
    if (label >= k) {
      throw std::invalid_argument("given label " + std::to_string(label) + " for '" + names.name(v) +
                                  "' exceeds the label count " + std::to_string(k));
    }
  }
  for (auto [a, b] : edges) {
    auto ia = givens.find(a);
    auto ib = givens.find(b);
    if (ia != givens.end() && ib != givens.end() && ia->second == ib->second) {
      throw std::invalid_argument("givens '" + names.name(a) + "' and '" + names.name(b) + "' clash");
    }
  }
}

namespace {

// Bron-Kerbosch with Tomita pivoting.
void expand(const std::vector<VarSet>& adj, VarSet& r, VarSet p, VarSet x, CliqueSet& out) {
  if (p.empty()) {
    if (x.empty()) out.push_back(make_varset(r));
    return;
  }
  // pivot on the vertex of P ∪ X with the most neighbours in P
  VarId pivot = p.front();
  std::size_t best = 0;
  bool first = true;
  for (const VarSet* pool : {&p, &x}) {
    for (VarId u : *pool) {
      const std::size_t hits = intersect(p, adj[u.value]).size();
      if (first || hits > best) {
        best = hits;
        pivot = u;
        first = false;
      }
    }
  }
  VarSet candidates;
  std::set_difference(p.begin(), p.end(), adj[pivot.value].begin(), adj[pivot.value].end(),
                      std::back_inserter(candidates));
  for (VarId v : candidates) {
    r.push_back(v);
    expand(adj, r, intersect(p, adj[v.value]), intersect(x, adj[v.value]), out);
    r.pop_back();
    p.erase(std::lower_bound(p.begin(), p.end(), v));
    x.insert(std::lower_bound(x.begin(), x.end(), v), v);
  }
}

}  // namespace

CliqueSet maximal_cliques(const ColoringProblem& p) {
  const auto adj = p.neighbours();
  CliqueSet out;
  VarSet r;
  expand(adj, r, p.variables(), {}, out);
  std::sort(out.begin(), out.end());
  return out;
}

CliqueSet split_cliques(const CliqueSet& cliques, std::size_t max_size) {
  if (max_size < 2) throw std::invalid_argument("cluster size must be at least 2");
  std::vector<VarSet> pieces;
  for (const auto& clique : cliques) {
    const std::size_t n = clique.size();
    if (n <= max_size) {
      pieces.push_back(clique);
      continue;
    }
    std::vector<std::vector<bool>> covered(n, std::vector<bool>(n, false));
    std::size_t uncovered = n * (n - 1) / 2;
    // M-combinations of positions in lexicographic order
    std::vector<std::size_t> pick(max_size);
    for (std::size_t i = 0; i < max_size; ++i) pick[i] = i;
    while (uncovered > 0) {
      bool useful = false;
      for (std::size_t i = 0; i < max_size && !useful; ++i)
        for (std::size_t j = i + 1; j < max_size && !useful; ++j) useful = !covered[pick[i]][pick[j]];
      if (useful) {
        VarSet piece;
        for (std::size_t i = 0; i < max_size; ++i) {
          piece.push_back(clique[pick[i]]);
          for (std::size_t j = i + 1; j < max_size; ++j) {
            if (!covered[pick[i]][pick[j]]) {
              covered[pick[i]][pick[j]] = true;
              --uncovered;
            }
          }
        }
        pieces.push_back(std::move(piece));
      }
      std::size_t i = max_size;
      while (i > 0 && pick[i - 1] == n - max_size + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < max_size; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  auto out = assimilate_subsets(pieces);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::string cell_characters(std::string_view text) {
  std::string cells;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) cells += c;
  return cells;
}

int box_size(int n) { return n == 4 ? 2 : 3; }

}  // namespace

int sudoku_order(std::string_view text) {
  const auto cells = cell_characters(text);
  if (cells.size() == 16) return 4;
  if (cells.size() == 81) return 9;
  throw std::invalid_argument("puzzle has " + std::to_string(cells.size()) + " cells; expected 16 or 81");
}

ColoringProblem sudoku_problem(std::string_view text, int n) {
  if (n != 4 && n != 9) throw std::invalid_argument("only 4x4 and 9x9 puzzles are supported");
  const auto cells = cell_characters(text);
  if (cells.size() != static_cast<std::size_t>(n * n)) {
    throw std::invalid_argument("puzzle has " + std::to_string(cells.size()) + " cells; expected " +
                                std::to_string(n * n));
  }
  ColoringProblem p;
  p.k = static_cast<Label>(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (n == 4) p.names.add(std::string(1, static_cast<char>('A' + r * n + c)));
      else p.names.add("r" + std::to_string(r + 1) + "c" + std::to_string(c + 1));
    }
  }
  const int b = box_size(n);
  for (int i = 0; i < n * n; ++i) {
    for (int j = i + 1; j < n * n; ++j) {
      const int ri = i / n, ci = i % n, rj = j / n, cj = j % n;
      if (ri == rj || ci == cj || (ri / b == rj / b && ci / b == cj / b)) p.add_edge(VarId(i), VarId(j));
    }
  }
  for (int i = 0; i < n * n; ++i) {
    const char ch = cells[i];
    if (ch == '0' || ch == '.') continue;
    if (ch < '1' || ch > '0' + n) throw std::invalid_argument(std::string("invalid puzzle character '") + ch + "'");
    p.givens[VarId(i)] = static_cast<Label>(ch - '1');
  }
  p.validate();
  return p;
}

std::string format_sudoku(const ColoringProblem& p, const VarAssignment& assignment) {
  const auto n = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(p.names.size()))));
  std::string out;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      auto it = assignment.find(VarId(static_cast<std::uint32_t>(r * n + c)));
      out += it == assignment.end() ? '.' : static_cast<char>('1' + it->second);
    }
    out += '\n';
  }
  return out;
}

ColoringProblem parse_adjacency(std::string_view text, Label k) {
  ColoringProblem p;
  p.k = k;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> tokens{std::istream_iterator<std::string>(fields), {}};
    if (tokens.empty()) continue;
    if (tokens.size() > 2) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 'nameA nameB'");
    }
    const VarId a = p.names.intern(tokens[0]);
    if (tokens.size() == 2) {
      const VarId b = p.names.intern(tokens[1]);
      if (a == b) throw std::invalid_argument("line " + std::to_string(line_no) + ": self-edge on '" + tokens[0] + "'");
      p.add_edge(a, b);
    }
  }
  return p;
}

std::string format_adjacency(const ColoringProblem& p) {
  std::string out;
  std::vector<bool> touched(p.names.size(), false);
  for (auto [a, b] : p.edges) touched[a.value] = touched[b.value] = true;
  for (VarId v : p.variables())
    if (!touched[v.value]) out += p.names.name(v) + "\n";
  for (auto [a, b] : p.edges) out += p.names.name(a) + " " + p.names.name(b) + "\n";
  return out;
}

ColoringProblem planar_grid_map(std::size_t width, std::size_t height, double diagonal_probability, std::uint64_t seed,
                                Label k) {
  if (width == 0 || height == 0) throw std::invalid_argument("map dimensions must be positive");
  ColoringProblem p;
  p.k = k;
  for (std::size_t i = 0; i < width * height; ++i) p.names.add("R" + std::to_string(i));
  auto cell = [&](std::size_t x, std::size_t y) { return VarId(static_cast<std::uint32_t>(y * width + x)); };
  std::mt19937_64 rng(seed);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      if (x + 1 < width) p.add_edge(cell(x, y), cell(x + 1, y));
      if (y + 1 < height) p.add_edge(cell(x, y), cell(x, y + 1));
      if (x + 1 < width && y + 1 < height) {
        // raw engine output keeps the generator identical across standard libraries
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const bool main_diagonal = (rng() & 1u) == 0;
        if (u < diagonal_probability) {
          if (main_diagonal) p.add_edge(cell(x, y), cell(x + 1, y + 1));
          else p.add_edge(cell(x + 1, y), cell(x, y + 1));
        }
      }
    }
  }
  return p;
}

Bias make_bias(const ColoringProblem& p, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0)) throw std::invalid_argument("bias magnitude must be non-negative");
  Bias bias;
  bias.delta = delta;
  for (VarId v : p.variables()) {
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (v.value + 1)));
    std::vector<Label> rank(p.k);
    for (Label l = 0; l < p.k; ++l) rank[l] = l;
    for (Label i = p.k; i > 1; --i) std::swap(rank[i - 1], rank[rng() % i]);
    std::vector<double> pref(p.k, 0.0);
    for (Label l = 0; l < p.k; ++l) pref[l] = p.k > 1 ? static_cast<double>(rank[l]) / (p.k - 1) : 0.0;
    bias.preference.push_back(std::move(pref));
  }
  return bias;
}

namespace {

double bias_weight(const Bias* bias, VarId v, Label label) {
  return bias && bias->delta > 0.0 ? 1.0 + bias->delta * bias->preference.at(v.value).at(label) : 1.0;
}

// The all-different factor of `clique` with its givens already observed.
// Same table as permutation_factor, bias scaling and observe in sequence,
// without enumerating the states the givens rule out.
SparseTable clique_factor(const ColoringProblem& p, const VarSet& clique, const Bias* bias) {
  if (clique.size() > p.k) permutation_factor(clique, p.k);  // throws the unsatisfiable-clique error
  VarSet unset;
  std::vector<bool> taken(p.k, false);
  double scale = 1.0;
  for (VarId v : clique) {
    auto it = p.givens.find(v);
    if (it == p.givens.end()) {
      unset.push_back(v);
      continue;
    }
    if (taken[it->second]) {
      throw Contradiction("given " + p.names.name(v) + "=" + std::to_string(it->second) +
                          " contradicts the clique {" + p.names.join(clique) + "}");
    }
    taken[it->second] = true;
    scale *= bias_weight(bias, v, it->second);
  }
  SparseTable shape(unset, std::vector<Label>(unset.size(), p.k));
  if (unset.empty()) return shape;
  std::vector<SparseTable::Entry> entries;
  Assignment current(unset.size());
  // depth-first in label order yields ascending indices
  auto fill = [&](auto&& self, std::size_t depth, double weight) -> void {
    if (depth == unset.size()) {
      entries.push_back({shape.encode(current), weight});
      return;
    }
    for (Label l = 0; l < p.k; ++l) {
      if (taken[l]) continue;
      taken[l] = true;
      current[depth] = l;
      self(self, depth + 1, weight * bias_weight(bias, unset[depth], l));
      taken[l] = false;
    }
  };
  fill(fill, 0, scale);
  if (entries.empty()) {
    throw Contradiction("givens leave no labelling of the clique {" + p.names.join(clique) + "}");
  }
  return SparseTable::adopt(shape.scope(), shape.cards(), std::move(entries));
}

}  // namespace

std::vector<ClusterFactor> build_factors(const ColoringProblem& p, const CliqueSet& cliques, const Bias* bias) {
  p.validate();
  // every edge must sit inside some clique, or its constraint is lost
  for (auto [a, b] : p.edges) {
    const bool covered = std::any_of(cliques.begin(), cliques.end(),
                                     [&](const VarSet& c) { return contains(c, a) && contains(c, b); });
    if (!covered) {
      throw std::invalid_argument("edge " + p.names.name(a) + "-" + p.names.name(b) + " is not inside any clique");
    }
  }
  std::vector<ClusterFactor> out;
  for (const auto& clique : cliques) {
    SparseTable table = clique_factor(p, clique, bias);
    if (table.arity() == 0) continue;
    VarSet vars = table.scope();
    out.push_back({std::move(vars), std::move(table)});
  }
  return out;
}

VarAssignment anchor_largest_clique(const ColoringProblem& p, const CliqueSet& cliques) {
  VarAssignment givens = p.givens;
  if (cliques.empty()) return givens;
  const VarSet* largest = &cliques.front();
  for (const auto& c : cliques)
    if (c.size() > largest->size()) largest = &c;
  if (largest->size() > p.k) {
    throw Contradiction("largest clique has " + std::to_string(largest->size()) + " variables but only " +
                        std::to_string(p.k) + " labels exist");
  }
  for (std::size_t i = 0; i < largest->size(); ++i) {
    const VarId v = (*largest)[i];
    const Label label = static_cast<Label>(i);
    auto [it, fresh] = givens.try_emplace(v, label);
    if (!fresh && it->second != label) {
      throw std::invalid_argument("given " + p.names.name(v) + "=" + std::to_string(it->second) +
                                  " conflicts with anchoring label " + std::to_string(label));
    }
  }
  for (auto [a, b] : p.edges) {
    auto ia = givens.find(a);
    auto ib = givens.find(b);
    if (ia != givens.end() && ib != givens.end() && ia->second == ib->second) {
      throw std::invalid_argument("anchoring clashes with given on edge " + p.names.name(a) + "-" + p.names.name(b));
    }
  }
  return givens;
}

ColoringReport verify_coloring(const ColoringProblem& p, const VarAssignment& assignment) {
  ColoringReport report;
  for (VarId v : p.variables())
    if (!assignment.count(v)) report.unassigned.push_back(v);
  for (auto [a, b] : p.edges) {
    auto ia = assignment.find(a);
    auto ib = assignment.find(b);
    if (ia != assignment.end() && ib != assignment.end() && ia->second == ib->second) report.violated_edges.push_back({a, b});
  }
  for (auto [v, label] : p.givens) {
    auto it = assignment.find(v);
    if (it != assignment.end() && it->second != label) report.given_mismatches.push_back(v);
  }
  return report;
}

}  // namespace cgcolor
