#include "cgcolor/pipeline.hpp"

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace cgcolor {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

const char* to_string(Topology t) { return t == Topology::ltrip ? "ltrip" : "bethe"; }

Topology parse_topology(std::string_view text) {
  if (text == "ltrip") return Topology::ltrip;
  if (text == "bethe") return Topology::bethe;
  throw std::invalid_argument("unknown topology '" + std::string(text) + "'");
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::solved: return "solved";
    case Outcome::invalid_solution: return "invalid solution";
    case Outcome::unconverged: return "unconverged";
    case Outcome::contradiction: return "contradiction";
  }
  return "?";
}

Model build_model(const ColoringProblem& p, const PipelineOptions& opts) {
  CliqueSet cliques = maximal_cliques(p);
  if (opts.cluster_size > 0) cliques = split_cliques(cliques, opts.cluster_size);

  ColoringProblem anchored = p;
  if (opts.anchor) anchored.givens = anchor_largest_clique(p, cliques);

  std::optional<Bias> bias;
  if (opts.bias) bias = make_bias(p, *opts.bias, opts.seed);
  auto factors = assimilate_subsets(build_factors(anchored, cliques, bias ? &*bias : nullptr));

  Model m;
  m.givens = anchored.givens;
  m.factor_clusters = factors.size();
  std::vector<VarSet> vars;
  for (const auto& f : factors) vars.push_back(f.vars);
  if (vars.empty()) return m;

  if (opts.topology == Topology::ltrip) {
    m.graph = ltrip(vars);
  } else {
    m.graph = bethe_graph(vars);
  }
  for (auto& f : factors) m.factors.push_back(std::move(f.table));
  for (std::size_t i = m.factors.size(); i < m.graph.clusters.size(); ++i)
    m.factors.push_back(SparseTable::uniform(m.graph.clusters[i].vars, {p.k}));
  return m;
}

SolveResult solve(const ColoringProblem& p, const PipelineOptions& opts) {
  SolveResult result;
  auto start = Clock::now();
  Model model;
  try {
    model = build_model(p, opts);
  } catch (const Contradiction& e) {
    result.build_ms = ms_since(start);
    result.message = e.what();
    return result;
  }
  result.build_ms = ms_since(start);
  result.cluster_count = model.factor_clusters;
  result.graph = model.graph;
  result.assignment = model.givens;

  start = Clock::now();
  if (model.graph.clusters.empty()) {
    result.converged = true;
  } else {
    try {
      auto state = init(model.graph, std::move(model.factors), opts.inference.semiring);
      auto post = state.run(opts.inference);
      result.converged = post.converged;
      result.stats = post.stats;
      for (auto [v, label] : post.decoded) result.assignment[v] = label;
    } catch (const Contradiction& e) {
      result.infer_ms = ms_since(start);
      result.message = e.what();
      return result;
    }
  }
  result.infer_ms = ms_since(start);

  result.report = verify_coloring(p, result.assignment);
  result.valid = result.report.valid();
  if (!result.converged) {
    result.outcome = Outcome::unconverged;
    result.message = "message budget exhausted before convergence";
  } else if (!result.valid) {
    result.outcome = Outcome::invalid_solution;
    result.message = std::to_string(result.report.violated_edges.size()) + " violated edges, " +
                     std::to_string(result.report.unassigned.size()) + " unassigned";
  } else {
    result.outcome = Outcome::solved;
  }
  return result;
}

const char* bench_csv_header() {
  return "instance,topology,cluster_size,cluster_count,converged,valid,messages,build_ms,infer_ms";
}

std::string to_csv_row(const BenchRecord& r) {
  return fmt::format("{},{},{},{},{},{},{},{:.3f},{:.3f}", r.instance, to_string(r.topology), r.cluster_size,
                     r.cluster_count, r.converged ? 1 : 0, r.valid ? 1 : 0, r.messages, r.build_ms, r.infer_ms);
}

std::vector<std::filesystem::path> bench_instances(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename().string().front() == '.') continue;
    out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.filename() < y.filename(); });
  return out;
}

namespace {

struct BenchTask {
  std::size_t instance;
  std::size_t size;
  Topology topology;
};

std::optional<ColoringProblem> load_puzzle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    spdlog::warn("bench: cannot read {}", path.string());
    return std::nullopt;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    const std::string text = buf.str();
    return sudoku_problem(text, sudoku_order(text));
  } catch (const std::exception& e) {
    spdlog::warn("bench: {}: {}", path.string(), e.what());
    return std::nullopt;
  }
}

}  // namespace

std::vector<BenchRecord> run_bench(const std::vector<std::filesystem::path>& instances, const BenchConfig& config) {
  std::vector<std::optional<ColoringProblem>> problems;
  for (const auto& path : instances) problems.push_back(load_puzzle(path));

  std::vector<BenchTask> tasks;
  for (std::size_t i = 0; i < instances.size(); ++i)
    for (std::size_t m : config.sizes)
      for (Topology t : config.topologies) tasks.push_back({i, m, t});

  std::vector<BenchRecord> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < tasks.size(); j = next++) {
      const auto& task = tasks[j];
      BenchRecord& r = rows[j];
      r.instance = instances[task.instance].filename().string();
      r.topology = task.topology;
      r.cluster_size = task.size;
      if (!problems[task.instance]) continue;
      PipelineOptions opts;
      opts.topology = task.topology;
      opts.cluster_size = task.size;
      opts.inference = config.inference;
      const auto res = solve(*problems[task.instance], opts);
      r.cluster_count = res.cluster_count;
      r.converged = res.converged;
      r.valid = res.outcome == Outcome::solved;
      r.messages = res.stats.messages;
      r.build_ms = res.build_ms;
      r.infer_ms = res.infer_ms;
      spdlog::info("bench: {} {} M={} -> {}", r.instance, to_string(r.topology), r.cluster_size, to_string(res.outcome));
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(tasks.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

BenchSummary summarize(const std::vector<BenchRecord>& records) {
  BenchSummary s;
  std::map<std::pair<std::string, std::size_t>, std::pair<int, int>> outcome;  // -1 absent, 0 fail, 1 ok
  std::set<std::string> names;
  for (const auto& r : records) {
    names.insert(r.instance);
    auto [it, fresh] = outcome.try_emplace({r.instance, r.cluster_size}, -1, -1);
    if (r.topology == Topology::ltrip) {
      ++s.ltrip_runs;
      s.ltrip_valid += r.valid;
      it->second.first = r.valid;
    } else {
      ++s.bethe_runs;
      s.bethe_valid += r.valid;
      it->second.second = r.valid;
    }
  }
  s.instances = names.size();
  for (const auto& [key, o] : outcome)
    if (o.first == 0 && o.second == 1) ++s.bethe_only_successes;
  return s;
}

}  // namespace cgcolor
