#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cgcolor/coloring.hpp"
#include "cgcolor/graphs.hpp"
#include "cgcolor/inference.hpp"

namespace cgcolor {

enum class Topology { ltrip, bethe };

const char* to_string(Topology t);
Topology parse_topology(std::string_view text);

struct PipelineOptions {
  Topology topology = Topology::ltrip;
  std::size_t cluster_size = 0;  // 0 keeps the maximal cliques
  InferenceOptions inference;
  bool anchor = false;
  std::optional<double> bias;  // delta; none disables biasing
  std::uint64_t seed = 0;
};

/// Factors linked into a topology, ready for inference.
struct Model {
  ClusterGraph graph;
  std::vector<SparseTable> factors;  // per graph cluster
  VarAssignment givens;              // including anchoring
  std::size_t factor_clusters = 0;   // clusters that carry a clique factor (hubs excluded)
};

/// Problem -> cliques -> optional split -> anchoring -> factors with
/// observations purged -> subset assimilation -> chosen topology.
Model build_model(const ColoringProblem& p, const PipelineOptions& opts);

enum class Outcome { solved, invalid_solution, unconverged, contradiction };

const char* to_string(Outcome o);

struct SolveResult {
  Outcome outcome = Outcome::contradiction;
  std::size_t cluster_count = 0;
  bool converged = false;
  bool valid = false;
  VarAssignment assignment;  // givens plus decoded variables
  ColoringReport report;
  InferenceStats stats;
  double build_ms = 0.0;
  double infer_ms = 0.0;
  std::string message;
  ClusterGraph graph;
};

SolveResult solve(const ColoringProblem& p, const PipelineOptions& opts);

/// One benchmark row.
struct BenchRecord {
  std::string instance;
  Topology topology = Topology::ltrip;
  std::size_t cluster_size = 0;
  std::size_t cluster_count = 0;
  bool converged = false;
  bool valid = false;
  std::size_t messages = 0;
  double build_ms = 0.0;
  double infer_ms = 0.0;
};

const char* bench_csv_header();
std::string to_csv_row(const BenchRecord& r);

struct BenchConfig {
  std::vector<std::size_t> sizes{3, 5, 7, 9};
  std::vector<Topology> topologies{Topology::ltrip, Topology::bethe};
  InferenceOptions inference;
  unsigned jobs = 1;
};

struct BenchSummary {
  std::size_t instances = 0;
  std::size_t ltrip_runs = 0, ltrip_valid = 0;
  std::size_t bethe_runs = 0, bethe_valid = 0;
  /// (instance, size) pairs where the factor graph succeeded and the cluster graph failed.
  std::size_t bethe_only_successes = 0;
};

/// Puzzle files in `dir`, sorted by file name (hidden files skipped).
std::vector<std::filesystem::path> bench_instances(const std::filesystem::path& dir);

/// Runs every (instance, topology, size) combination. Rows come back in
/// instance, size, topology order regardless of `jobs`.
std::vector<BenchRecord> run_bench(const std::vector<std::filesystem::path>& instances, const BenchConfig& config);

BenchSummary summarize(const std::vector<BenchRecord>& records);

}  // namespace cgcolor
