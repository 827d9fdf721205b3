#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cgcolor/graphs.hpp"
#include "cgcolor/types.hpp"

namespace cgcolor {

/// Undirected graph over named variables, a label count and optional givens.
struct ColoringProblem {
  VariableRegistry names;
  std::set<std::pair<VarId, VarId>> edges;  // first < second
  Label k = 0;
  VarAssignment givens;

  std::vector<VarId> variables() const { return names.ids(); }
  void add_edge(VarId a, VarId b);
  bool adjacent(VarId a, VarId b) const;
  /// Sorted neighbour lists indexed by variable id.
  std::vector<VarSet> neighbours() const;
  /// Throws std::invalid_argument if a given is out of range or two givens
  /// clash on an edge.
  void validate() const;
};

/// Cliques (and later, clusters derived from them) in canonical order.
using CliqueSet = std::vector<VarSet>;

/// All maximal cliques, sorted lexicographically. Isolated variables form
/// singleton cliques.
CliqueSet maximal_cliques(const ColoringProblem& p);

/// Replaces every clique larger than `max_size` by M-subsets that together
/// still cover each of its variable pairs. Output is deduplicated,
/// subset-assimilated and sorted.
CliqueSet split_cliques(const CliqueSet& cliques, std::size_t max_size);

/// Parses a 4x4 or 9x9 puzzle: n*n characters row-major, '1'..'n' are
/// givens, '0' or '.' blanks, whitespace ignored. 4x4 cells are named A..P,
/// 9x9 cells r<row>c<col> (1-based). Labels are the digit minus one.
ColoringProblem sudoku_problem(std::string_view text, int n);

/// 4 or 9 depending on how many cell characters the text holds.
int sudoku_order(std::string_view text);

/// Renders an assignment as n lines of n digits ('.' when unassigned).
std::string format_sudoku(const ColoringProblem& p, const VarAssignment& assignment);

/// One edge per line ("nameA nameB"), or a lone name declaring a region;
/// '#' starts a comment.
ColoringProblem parse_adjacency(std::string_view text, Label k);
std::string format_adjacency(const ColoringProblem& p);

/// Grid of width*height regions with 4-neighbour borders; each 2x2 block of
/// regions additionally gets one of its two diagonals with probability
/// `diagonal_probability`. Always planar.
ColoringProblem planar_grid_map(std::size_t width, std::size_t height, double diagonal_probability, std::uint64_t seed,
                                Label k = 4);

/// Per-variable label preferences used to break the symmetry between
/// otherwise equivalent colourings.
struct Bias {
  double delta = 0.01;
  std::vector<std::vector<double>> preference;  // [variable][label], in [0, 1]
};

/// Preference of each variable is a pseudo-random permutation of
/// 0, 1/(k-1), ..., 1 keyed by (seed, variable id).
Bias make_bias(const ColoringProblem& p, double delta, std::uint64_t seed);

/// One all-different factor per clique with the problem's givens observed
/// (and purged from the scopes). Cliques whose variables are all given are
/// dropped. With a bias, every entry is scaled by prod(1 + delta*preference).
std::vector<ClusterFactor> build_factors(const ColoringProblem& p, const CliqueSet& cliques, const Bias* bias = nullptr);

/// Givens extended with labels 0..s-1 on the first largest clique.
VarAssignment anchor_largest_clique(const ColoringProblem& p, const CliqueSet& cliques);

struct ColoringReport {
  std::vector<std::pair<VarId, VarId>> violated_edges;
  std::vector<VarId> given_mismatches;
  std::vector<VarId> unassigned;
  bool valid() const { return violated_edges.empty() && given_mismatches.empty() && unassigned.empty(); }
};

ColoringReport verify_coloring(const ColoringProblem& p, const VarAssignment& assignment);

}  // namespace cgcolor
