#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cgcolor/factors.hpp"
#include "cgcolor/types.hpp"

namespace cgcolor {

struct Cluster {
  std::size_t id = 0;
  VarSet vars;
};

/// Undirected link between clusters `a` < `b`.
struct Sepset {
  std::size_t a = 0;
  std::size_t b = 0;
  VarSet vars;
};

enum class GraphKind { ltrip, bethe, custom };

const char* to_string(GraphKind kind);

/// Clusters are the nodes, sepsets the labelled edges. Cluster ids equal
/// their position in `clusters`.
struct ClusterGraph {
  std::vector<Cluster> clusters;
  std::vector<Sepset> sepsets;
  GraphKind kind = GraphKind::custom;

  /// Adds a cluster and returns its id.
  std::size_t add_cluster(VarSet vars);
  /// Adds a sepset; endpoints may be given in either order.
  void add_sepset(std::size_t a, std::size_t b, VarSet vars);

  /// Sepset indices touching each cluster, ascending.
  std::vector<std::vector<std::size_t>> incidence() const;

  friend bool operator==(const ClusterGraph&, const ClusterGraph&);
};

bool operator==(const Cluster& x, const Cluster& y);
bool operator==(const Sepset& x, const Sepset& y);

/// A cluster's variable set together with its factor.
struct ClusterFactor {
  VarSet vars;
  SparseTable table;
};

/// Folds every cluster that is a subset of another into the first
/// surviving superset (by input position). Exact duplicates merge into the
/// earliest copy. Survivors keep their relative input order.
std::vector<ClusterFactor> assimilate_subsets(std::vector<ClusterFactor> clusters);

/// Table-free variant of assimilate_subsets.
std::vector<VarSet> assimilate_subsets(const std::vector<VarSet>& clusters);

/// Symmetric matrix indexed by layer position; the diagonal is unused (0).
using WeightMatrix = std::vector<std::vector<int>>;

/// Intersection sizes, boosted by how many maximal-weight links each
/// endpoint has. Every cluster must share at least the layer variable.
WeightMatrix connection_weights(const std::vector<VarSet>& layer);

/// Largest shared-intersection weight before boosting (0 for a single cluster).
int max_intersection_weight(const std::vector<VarSet>& layer);

struct WeightedEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  int weight = 0;
};

/// Maximum-weight spanning tree of the complete graph over `weights.size()`
/// nodes. Edges are taken greedily by descending weight, then ascending
/// smaller endpoint, then ascending larger endpoint.
std::vector<WeightedEdge> max_spanning_tree(const WeightMatrix& weights);

/// One per-variable tree built by LTRIP.
struct LayerTree {
  VarId variable;
  std::vector<std::size_t> members;  // cluster ids containing the variable, ascending
  WeightMatrix weights;              // indexed by position in `members`
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // cluster ids, smaller first
};

/// Layered-trees construction over non-empty clusters. Subset clusters are
/// tolerated (they simply join their layers) but callers normally assimilate
/// them first. Sepsets are listed in order of first creation.
ClusterGraph ltrip(const std::vector<VarSet>& clusters, std::vector<LayerTree>* layers = nullptr);

/// Factor-graph topology: original clusters keep ids 0..N-1, then one
/// singleton hub per variable (ascending id) linked to every cluster that
/// contains it.
ClusterGraph bethe_graph(const std::vector<VarSet>& clusters);

struct RipViolation {
  enum class Kind {
    empty_cluster,
    bad_endpoint,
    self_loop,
    duplicate_link,
    empty_sepset,
    sepset_outside_intersection,
    disconnected,
    cycle,
  };
  Kind kind;
  std::optional<VarId> variable;
  std::vector<std::size_t> sepsets;  // offending sepset indices
  std::string message;
};

const char* to_string(RipViolation::Kind kind);

struct RipReport {
  std::vector<RipViolation> violations;
  bool valid() const { return violations.empty(); }
};

/// Checks the structural cluster-graph conditions and, per variable, that
/// the links carrying it form exactly one tree over the clusters holding it.
RipReport validate_rip(const ClusterGraph& g);

/// Graphviz text. Clusters are ellipses labelled with variable names;
/// sepsets appear as boxed edge labels.
std::string export_dot(const ClusterGraph& g, const VariableRegistry& names);

}  // namespace cgcolor
