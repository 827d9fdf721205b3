#pragma once

#include <map>
#include <set>
#include <vector>

#include "cgcolor/factors.hpp"
#include "cgcolor/graphs.hpp"
#include "cgcolor/types.hpp"

namespace cgcolor {

enum class Schedule { residual, round_robin };

struct InferenceOptions {
  Semiring semiring = Semiring::max;
  double threshold = 1e-8;  // KL units
  std::size_t max_messages = 1'000'000;
  Schedule schedule = Schedule::residual;

  /// Throws std::invalid_argument on a non-positive threshold or budget.
  void validate() const;
};

struct InferenceStats {
  std::size_t messages = 0;
  std::size_t sweeps = 0;
  double wall_ms = 0.0;
};

/// Which way a message crosses a sepset.
enum class Direction { a_to_b, b_to_a };

struct Posterior {
  std::map<VarId, SparseTable> marginals;
  std::vector<SparseTable> cluster_beliefs;
  bool converged = false;
  VarAssignment decoded;
  InferenceStats stats;
};

/// Belief-update (Lauritzen-Spiegelhalter) state on a cluster graph.
///
/// Each cluster holds its current belief and each sepset the last message
/// that crossed it. Directed edge `2*s` is sepset s from a to b, `2*s+1`
/// the reverse. Every directed edge carries a pending residual used for
/// scheduling; it starts at +infinity.
class InferenceState {
 public:
  InferenceState(ClusterGraph graph, std::vector<SparseTable> factors, Semiring semiring);

  const ClusterGraph& graph() const { return graph_; }
  Semiring semiring() const { return semiring_; }
  const std::vector<SparseTable>& cluster_beliefs() const { return beliefs_; }
  const std::vector<SparseTable>& sepset_beliefs() const { return sepset_beliefs_; }
  const InferenceStats& stats() const { return stats_; }

  std::size_t directed_edge_count() const { return pending_.size(); }
  /// Directed edges whose pending residual is positive, i.e. still queued.
  std::size_t queued() const;
  double pending(std::size_t directed) const { return pending_.at(directed); }
  double last_residual(std::size_t directed) const { return last_residual_.at(directed); }
  double max_pending() const;

  /// Sends one message over `sepset` and returns its KL residual against
  /// the previous sepset belief. Throws Contradiction if the target loses
  /// all support.
  double pass_message(std::size_t sepset, Direction dir);

  Posterior run(const InferenceOptions& opts);

 private:
  double send(std::size_t directed);
  void set_pending(std::size_t directed, double value);
  Posterior posterior(bool converged) const;

  ClusterGraph graph_;
  Semiring semiring_;
  std::vector<SparseTable> beliefs_;
  std::vector<SparseTable> sepset_beliefs_;
  std::vector<std::vector<std::size_t>> incidence_;
  std::vector<double> pending_;
  std::vector<double> last_residual_;
  std::vector<bool> sent_;
  // for unsent edges: messages into the source (other than from the target) not yet received
  std::vector<std::size_t> unheard_;
  struct Key {
    double pending;
    std::size_t unheard;
    std::size_t id;
  };
  // highest pending first; among equal (infinite) ones the best-informed
  // source, then the lowest directed id
  struct Priority {
    bool operator()(const Key& x, const Key& y) const {
      if (x.pending != y.pending) return x.pending > y.pending;
      if (x.unheard != y.unheard) return x.unheard < y.unheard;
      return x.id < y.id;
    }
  };
  std::set<Key, Priority> queue_;
  Key key(std::size_t directed) const { return {pending_[directed], unheard_[directed], directed}; }
  InferenceStats stats_;
};

/// Validates scopes and cardinalities, then builds the state. Factors are
/// given per cluster id and must cover exactly that cluster's variables.
InferenceState init(const ClusterGraph& g, std::vector<SparseTable> factors, Semiring semiring = Semiring::max);

struct CalibrationReport {
  std::vector<double> discrepancy;  // per sepset, symmetric KL of endpoint marginals
  double max_discrepancy = 0.0;
  bool calibrated = true;
};

/// Compares the two endpoint beliefs of every sepset on its variables.
CalibrationReport check_calibration(const InferenceState& state, double tol);

}  // namespace cgcolor
